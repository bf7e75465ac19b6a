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

"""One-time converter from a FLAME model pickle to the .nac container.

    python3 tools/flame_to_nac.py generic_model.pkl assets.nac --n-beta 100 --n-psi 50

FLAME stores shape and expression directions in one `shapedirs` array (300
shape components followed by the expression components).  Pickles that hold
chumpy arrays are read with a small stand-in so chumpy itself is not needed.
"""

import argparse
import json
import pickle
import struct
import sys

import numpy as np

SHAPE_COMPONENTS = 300


class _Loose(pickle.Unpickler):
    """Maps chumpy classes to a plain holder whose state carries the array."""

    def find_class(self, module, name):
        if module.startswith("chumpy"):
            return _ChumpyStub
        return super().find_class(module, name)


class _ChumpyStub:
    def __init__(self, *args, **kwargs):
        pass

    def __setstate__(self, state):
        self.__dict__.update(state)

    def __array__(self, dtype=None, copy=None):
        x = self.__dict__.get("x")
        return np.asarray(x, dtype=dtype)


def dense(a):
    if hasattr(a, "toarray"):
        a = a.toarray()
    return np.asarray(a)


def encode(arrays):
    manifest = {}
    payload = bytearray()
    for name, arr in arrays.items():
        dtype = "u32" if arr.dtype == np.uint32 else "f32"
        data = arr.astype("<u4" if dtype == "u32" else "<f4").tobytes()
        manifest[name] = {"dtype": dtype, "shape": list(arr.shape), "offset": len(payload), "length": len(data)}
        payload += data
    text = json.dumps(manifest, separators=(",", ":")).encode("utf-8")
    return b"NAC1" + struct.pack("<I", len(text)) + text + bytes(payload)


def convert(model, n_beta, n_psi):
    shapedirs = dense(model["shapedirs"]).astype(np.float64)
    n_expr = shapedirs.shape[2] - SHAPE_COMPONENTS
    if n_beta > SHAPE_COMPONENTS or n_psi > n_expr:
        raise SystemExit("requested %d/%d components, model has %d/%d" % (n_beta, n_psi, SHAPE_COMPONENTS, n_expr))
    parents = dense(model["kintree_table"])[0].astype(np.int64)
    parents = np.where(parents < 0, 0xFFFFFFFF, parents)
    parents[0] = 0xFFFFFFFF
    weights = dense(model["weights"]).astype(np.float64)
    weights /= weights.sum(axis=1, keepdims=True)
    return {
        "template": dense(model["v_template"]).astype(np.float32),
        "faces": dense(model["f"]).astype(np.uint32),
        "shape_basis": shapedirs[:, :, :n_beta].astype(np.float32),
        "expression_basis": shapedirs[:, :, SHAPE_COMPONENTS:SHAPE_COMPONENTS + n_psi].astype(np.float32),
        "pose_basis": dense(model["posedirs"]).astype(np.float32),
        "joint_regressor": dense(model["J_regressor"]).astype(np.float32),
        "skin_weights": weights.astype(np.float32),
        "parents": parents.astype(np.uint32),
    }


def main(argv):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("pkl")
    ap.add_argument("out")
    ap.add_argument("--n-beta", type=int, default=100)
    ap.add_argument("--n-psi", type=int, default=50)
    args = ap.parse_args(argv)
    with open(args.pkl, "rb") as f:
        model = _Loose(f, encoding="latin1").load()
    with open(args.out, "wb") as f:
        f.write(encode(convert(model, args.n_beta, args.n_psi)))


if __name__ == "__main__":
    main(sys.argv[1:])
