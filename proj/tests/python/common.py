"""Independent readers for the binary containers, plus a tiny check harness."""

import argparse
import json
import struct
import sys
from pathlib import Path

import numpy as np


def parse_args(description):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--fixtures", type=Path, required=True)
    p.add_argument("--cli", type=Path, required=True)
    p.add_argument("--repo", type=Path, required=True)
    return p.parse_args()


def read_container(path, magic):
    """Returns (version, header dict, payload bytes)."""
    raw = Path(path).read_bytes()
    if raw[:4] != magic.encode():
        raise ValueError(f"{path}: magic {raw[:4]!r} != {magic}")
    version, length = struct.unpack_from("<IQ", raw, 4)
    start = 16
    header = json.loads(raw[start:start + length].decode("utf-8"))
    return version, header, raw[start + length:]


def read_recording(path):
    _, h, payload = read_container(path, "EEGC")
    off = 0
    trials = []
    for t in h["trials"]:
        n = t["channels"] * t["samples"]
        data = np.frombuffer(payload, dtype="<f4", count=n, offset=off).reshape(t["channels"], t["samples"])
        off += 4 * n
        trials.append(dict(t, data=data.astype(np.float64)))
    if off != len(payload):
        raise ValueError(f"{path}: {len(payload) - off} trailing payload bytes")
    return h, trials


def read_features(path):
    _, h, payload = read_container(path, "EEGF")
    off = 0
    items = []
    for it in h["items"]:
        shape = (it["frames"], it["bands"], it["channels"])
        n = int(np.prod(shape))
        de = np.frombuffer(payload, dtype="<f8", count=n, offset=off).reshape(shape)
        off += 8 * n
        psd = np.frombuffer(payload, dtype="<f8", count=n, offset=off).reshape(shape)
        off += 8 * n
        items.append(dict(it, de=de, psd=psd))
    if off != len(payload):
        raise ValueError(f"{path}: {len(payload) - off} trailing payload bytes")
    return h, items


def read_embeddings(path):
    _, h, payload = read_container(path, "EEGT")
    shape = (len(h["labels"]), len(h["templates"]), h["dim"])
    values = np.frombuffer(payload, dtype="<f4").reshape(shape).astype(np.float64)
    return h, values


def read_checkpoint(path):
    _, h, payload = read_container(path, "EEGP")
    off = 0
    params = {}
    for p in h["parameters"]:
        n = int(np.prod(p["shape"])) if p["shape"] else 1
        params[p["name"]] = np.frombuffer(payload, dtype="<f8", count=n, offset=off).reshape(p["shape"])
        off += 8 * n
    if off != len(payload):
        raise ValueError(f"{path}: {len(payload) - off} trailing payload bytes")
    return h, params


class Checks:
    def __init__(self, name):
        self.name = name
        self.failures = 0
        self.count = 0

    def close(self, what, got, want, atol=0.0, rtol=0.0):
        got = np.asarray(got, dtype=np.float64)
        want = np.asarray(want, dtype=np.float64)
        ok = got.shape == want.shape and np.allclose(got, want, atol=atol, rtol=rtol)
        err = float(np.max(np.abs(got - want))) if got.shape == want.shape and got.size else float("nan")
        self.report(ok, what, f"max abs err {err:.3g} (shape {got.shape} vs {want.shape})")

    def equal(self, what, got, want):
        self.report(got == want, what, f"{got!r} vs {want!r}" if got != want else "equal")

    def true(self, what, cond, detail=""):
        self.report(bool(cond), what, detail)

    def report(self, ok, what, detail):
        self.count += 1
        if not ok:
            self.failures += 1
        print(f"{'ok  ' if ok else 'FAIL'} {what}: {detail}")

    def finish(self):
        print(f"{self.name}: {self.count - self.failures}/{self.count} checks passed")
        sys.exit(1 if self.failures else 0)
