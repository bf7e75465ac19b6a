# Copyright 2026 The neutrex-quality Authors.
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

"""Regenerates the scikit-learn SVM fixtures.

Trains a one-class and a two-class RBF SVM on seeded Gaussian blobs, exports
both in the portable model JSON and records sklearn's own decision values on
20 held-out points.  Usage: python3 make_svm_fixture.py [out_dir]
"""

import json
import os
import sys

import numpy as np
from sklearn.svm import SVC, OneClassSVM

DIM = 8
GAMMA = 0.125


def export(model, mode, nu=None):
    out = {
        "mode": mode,
        "gamma": GAMMA,
        "support_vectors": model.support_vectors_.tolist(),
        "dual_coefs": model.dual_coef_[0].tolist(),
        "intercept": float(model.intercept_[0]),
    }
    if nu is not None:
        out["nu"] = nu
    return out


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
    rng = np.random.default_rng(20260101)
    neutral = rng.normal(0.0, 1.0, size=(150, DIM))
    other = rng.normal(1.5, 1.2, size=(150, DIM))

    one = OneClassSVM(kernel="rbf", gamma=GAMMA, nu=0.05, tol=1e-10).fit(neutral)
    x = np.vstack([neutral, other])
    y = np.r_[np.ones(len(neutral)), -np.ones(len(other))]
    two = SVC(kernel="rbf", gamma=GAMMA, C=1.0, tol=1e-10).fit(x, y)

    held = np.vstack([rng.normal(0.0, 1.0, size=(10, DIM)), rng.normal(1.5, 1.2, size=(10, DIM))])
    one_vals = one.decision_function(held)
    two_vals = two.decision_function(held)

    with open(os.path.join(out_dir, "svm_one_class.json"), "w") as f:
        json.dump(export(one, "one-class", 0.05), f)
        f.write("\n")
    with open(os.path.join(out_dir, "svm_two_class.json"), "w") as f:
        json.dump(export(two, "two-class"), f)
        f.write("\n")
    with open(os.path.join(out_dir, "svm_heldout.jsonl"), "w") as f:
        for i, row in enumerate(held):
            f.write(json.dumps({"sample_id": "h%02d" % i, "vector": row.tolist()}) + "\n")
    with open(os.path.join(out_dir, "svm_expected.csv"), "w") as f:
        f.write("sample_id,one_class,two_class\n")
        for i in range(len(held)):
            f.write("h%02d,%r,%r\n" % (i, float(one_vals[i]), float(two_vals[i])))


if __name__ == "__main__":
    main()
