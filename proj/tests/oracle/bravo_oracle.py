#!/usr/bin/env python3
# Copyright 2026 The BRAVO Evaluation Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""Reference scorer used to produce golden reports for the C++ test suite.

Shares no code with the library: PNGs are read with Pillow, ranking metrics
come from scikit-learn, everything else is plain numpy.

    bravo_oracle.py FIXTURE_DIR OUT_JSON [--ece-bins 15] [--submission-id ID]
"""

import argparse
import json
import pathlib

import numpy as np
from PIL import Image
from sklearn.metrics import average_precision_score, roc_auc_score, roc_curve

SUBSETS = ["acdc", "smiyc", "synrain", "synobjs", "synflare", "outofcontext"]
SEMANTIC = {"acdc", "synrain", "synobjs", "synflare", "outofcontext"}
OOD = {"smiyc", "synobjs"}
NUM_CLASSES = 19
OOD_LABEL = 254
VOID_LABEL = 255
MAX_LEVEL = 65535


def load(path):
    return np.array(Image.open(path)).astype(np.int64)


def fpr_at_tpr(labels, scores, target=0.95):
    fpr, tpr, _ = roc_curve(labels, scores, drop_intermediate=False)
    i = int(np.argmax(tpr >= target))
    if tpr[i] == target or i == 0:
        return float(fpr[i])
    return float(fpr[i - 1] + (target - tpr[i - 1]) * (fpr[i] - fpr[i - 1]) / (tpr[i] - tpr[i - 1]))


def miou(gt, pred):
    conf = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    np.add.at(conf, (gt, pred), 1)
    tp = np.diag(conf)
    union = conf.sum(0) + conf.sum(1) - tp
    present = union > 0
    return float(np.mean(tp[present] / union[present]))


def ece(levels, correct, bins):
    idx = np.minimum(levels * bins // MAX_LEVEL, bins - 1)
    total = 0.0
    for b in range(bins):
        sel = idx == b
        if sel.any():
            total += abs(correct[sel].sum() - levels[sel].sum() / MAX_LEVEL)
    return total / len(levels)


def hmean(values):
    values = np.asarray(values, dtype=np.float64)
    if (values == 0).any():
        return 0.0
    return float(len(values) / np.sum(1.0 / values))


def semantic_terms(m):
    return [m["miou"], 1 - m["ece"], m["auroc"], 1 - m["fpr95"], m["aupr_success"], m["aupr_error"]]


def ood_terms(m):
    return [m["auroc"], 1 - m["fpr95"], m["auprc"]]


def score_subset(root, subset, bins):
    frames = sorted(p.name[: -len("_pred.png")] for p in (root / subset).glob("*_pred.png"))
    gts, preds, confs = [], [], []
    for f in frames:
        gts.append(load(root / subset / f"{f}_gt.png").ravel())
        preds.append(load(root / subset / f"{f}_pred.png").ravel())
        confs.append(load(root / subset / f"{f}_conf.png").ravel())
    gt, pred, conf = map(np.concatenate, (gts, preds, confs))
    out = {"subset": subset, "frames": len(frames)}
    valid = gt < NUM_CLASSES
    sem = None
    if subset in SEMANTIC:
        g, p, c = gt[valid], pred[valid], conf[valid]
        correct = (g == p).astype(np.int64)
        sem = {
            "miou": miou(g, p),
            "ece": ece(c, correct, bins),
            "auroc": float(roc_auc_score(correct, c)),
            "fpr95": fpr_at_tpr(correct, c),
            "aupr_success": float(average_precision_score(correct, c)),
            "aupr_error": float(average_precision_score(1 - correct, MAX_LEVEL - c)),
        }
        out["semantic_pixels"] = int(valid.sum())
    else:
        out["semantic_pixels"] = 0
    ood = None
    if subset in OOD:
        keep = valid | (gt == OOD_LABEL)
        label = (gt[keep] == OOD_LABEL).astype(np.int64)
        score = MAX_LEVEL - conf[keep]
        ood = {
            "auroc": float(roc_auc_score(label, score)),
            "fpr95": fpr_at_tpr(label, score),
            "auprc": float(average_precision_score(label, score)),
        }
        out["ood_pixels"] = int(keep.sum())
    else:
        out["ood_pixels"] = 0
    out["semantic"] = sem
    out["ood"] = ood
    terms = (semantic_terms(sem) if sem else []) + (ood_terms(ood) if ood else [])
    out["summary"] = hmean(terms)
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("fixture", type=pathlib.Path)
    ap.add_argument("out", type=pathlib.Path)
    ap.add_argument("--ece-bins", type=int, default=15)
    ap.add_argument("--submission-id", default=None)
    args = ap.parse_args()

    subsets = [score_subset(args.fixture, s, args.ece_bins) for s in SUBSETS]
    sem_keys = ["miou", "ece", "auroc", "fpr95", "aupr_success", "aupr_error"]
    ood_keys = ["auroc", "fpr95", "auprc"]
    sem_mean = {k: float(np.mean([s["semantic"][k] for s in subsets if s["semantic"]])) for k in sem_keys}
    ood_mean = {k: float(np.mean([s["ood"][k] for s in subsets if s["ood"]])) for k in ood_keys}
    semantic = hmean(semantic_terms(sem_mean))
    ood = hmean(ood_terms(ood_mean))
    report = {
        "submission_id": args.submission_id or args.fixture.resolve().name,
        "ece_bins": args.ece_bins,
        "subsets": subsets,
        "semantic_mean": sem_mean,
        "ood_mean": ood_mean,
        "semantic": semantic,
        "ood": ood,
        "bravo_index": hmean([semantic, ood]),
    }
    args.out.write_text(json.dumps(report, indent=2) + "\n")


if __name__ == "__main__":
    main()
