"""Runs the command-line tool and parses every artifact it writes."""

import csv
import hashlib
import json
import subprocess
import tempfile
import xml.etree.ElementTree as ET
from collections import defaultdict
from pathlib import Path

import numpy as np

from common import Checks, parse_args, read_checkpoint, read_features, read_recording

CONFIG = {
    "preset": "toy",
    "synth": {"n_subjects": 2, "n_sessions": 1, "trials_per_class": 3, "trial_seconds": 8.0},
    "run": {"max_epochs": 2, "patience": 2, "n_shots": [0, 2, 8]},
}


def git_blob(path):
    data = Path(path).read_bytes()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def main():
    args = parse_args(__doc__)
    c = Checks("cli_artifacts")
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cfg = tmp / "config.json"
        cfg.write_text(json.dumps(CONFIG))

        def run(*argv):
            proc = subprocess.run([str(args.cli), *argv], capture_output=True, text=True)
            c.equal(f"exit code of {argv[0]}", proc.returncode, 0)
            if proc.returncode:
                print(proc.stdout, proc.stderr)
            return proc

        run("synth", "--config", str(cfg), "--out", str(tmp / "s"))
        h, trials = read_recording(tmp / "s" / "recording.eegc")
        syn = CONFIG["synth"]
        c.equal("synth trial count", len(trials), syn["n_subjects"] * syn["n_sessions"] * 3 * syn["trials_per_class"])
        c.true("synth trial length", all(t["samples"] == round(t["fs"] * syn["trial_seconds"]) for t in trials))
        c.true("synth samples finite", all(np.isfinite(t["data"]).all() for t in trials))
        summary = json.loads((tmp / "s" / "summary.json").read_text())
        c.equal("synth git blob hash", summary["git_blob"], git_blob(tmp / "s" / "recording.eegc"))
        manifest = json.loads((tmp / "s" / "manifest.json").read_text())
        c.equal("synth manifest command", manifest["command"], "synth")
        c.equal("synth manifest echoes config", manifest["config"]["synth"]["n_subjects"], syn["n_subjects"])

        run("featurize", "--config", str(cfg), "--input", str(tmp / "s" / "recording.eegc"), "--out", str(tmp / "f"))
        fh, items = read_features(tmp / "f" / "features.eegf")
        frames = fh["featurize"]["frames_per_sample"]
        win = round(fh["featurize"]["window_seconds"] * trials[0]["fs"])
        blocks = trials[0]["samples"] // win // frames
        c.equal("feature item count", len(items), len(trials) * blocks)
        c.equal("feature channel names", fh["channel_names"], h["channel_names"])
        c.true("feature values finite", all(np.isfinite(it["de"]).all() and np.isfinite(it["psd"]).all() for it in items))

        run("train", "--config", str(cfg), "--input", str(tmp / "f" / "features.eegf"), "--out", str(tmp / "t"))
        ph, params = read_checkpoint(tmp / "t" / "model.eegp")
        c.true("checkpoint has parameters", len(params) > 10, f"{len(params)} tensors")
        c.equal("checkpoint names unique", len(params), len(ph["parameters"]))
        c.true("checkpoint values finite", all(np.isfinite(v).all() for v in params.values()))
        c.true("checkpoint step advanced", ph["step"] > 0, f"step {ph['step']}")
        tsum = json.loads((tmp / "t" / "summary.json").read_text())
        c.equal("bank hash unchanged by training", tsum["bank_hash_before"], tsum["bank_hash_after"])
        rows = read_csv(tmp / "t" / "results.csv")
        c.equal("train results rows", len(rows), 1)
        c.equal("train n_train", int(rows[0]["n_train"]), len(items))

        run("eval-nshot", "--config", str(cfg), "--input", str(tmp / "s" / "recording.eegc"), "--out", str(tmp / "n"))
        rows = read_csv(tmp / "n" / "results.csv")
        shots = CONFIG["run"]["n_shots"]
        c.equal("nshot rows", len(rows), syn["n_subjects"] * len(shots))
        c.true("nshot accuracy in [0, 1]", all(0.0 <= float(r["accuracy"]) <= 1.0 for r in rows))

        run("report", "--input", str(tmp / "n" / "results.csv"), "--out", str(tmp / "r"))
        groups = defaultdict(list)
        for r in rows:
            groups[r["n_shot"]].append(float(r["accuracy"]))
        root = ET.parse(tmp / "r" / "nshot_curve.svg").getroot()
        points = [e for e in root.iter() if e.get("class") == "point"]
        c.equal("curve point count", len(points), len(shots))
        for p in points:
            want = float(np.mean(groups[p.get("data-x")]))
            c.close(f"curve point N={p.get('data-x')}", float(p.get("data-value")), want, atol=1e-6)
        per_subject = ET.parse(tmp / "r" / "per_subject.svg").getroot()
        c.true("per-subject chart parses", per_subject.tag.endswith("svg"))
    c.finish()


if __name__ == "__main__":
    main()
