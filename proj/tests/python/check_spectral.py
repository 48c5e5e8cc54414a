"""Filter design, zero-phase filtering, PSD estimators and framed features against scipy."""

import json
import math

import numpy as np
from scipy import signal

from common import Checks, parse_args, read_features, read_recording


def padlen(n, low, fs, sections):
    min_length = 3 * (2 * sections + 1)
    return min(n - 1, max(min_length, math.ceil(3.0 * fs / low)))


def band_power(freqs, density, low, high, fs):
    # each bin spreads its density uniformly over [f - df/2, f + df/2], clipped to [0, fs/2]
    df = freqs[1] - freqs[0]
    lo = np.maximum(0.0, freqs - df / 2)
    hi = np.minimum(fs / 2, freqs + df / 2)
    overlap = np.clip(np.minimum(hi, high) - np.maximum(lo, low), 0.0, None)
    return float(np.sum(density * overlap))


def main():
    args = parse_args(__doc__)
    fx = args.fixtures
    c = Checks("spectral")
    ref = json.loads((fx / "spectral.json").read_text())
    fs = ref["fs"]
    x = np.asarray(ref["input"])

    for f in ref["filters"]:
        sos = signal.butter(4, [f["low"], f["high"]], btype="band", fs=fs, output="sos")
        ours = np.asarray(f["sos"])
        # section ordering and per-section gain split may differ; compare the overall response
        w = np.linspace(0.5, fs / 2 - 0.5, 400)
        _, h_ref = signal.sosfreqz(sos, worN=w, fs=fs)
        _, h_got = signal.sosfreqz(ours, worN=w, fs=fs)
        c.close(f"{f['name']} frequency response", np.abs(h_got), np.abs(h_ref), atol=1e-9)
        c.close(f"{f['name']} pole radii", np.sort(np.abs(signal.sos2zpk(ours)[1])),
                np.sort(np.abs(signal.sos2zpk(sos)[1])), atol=1e-9)
        pad = padlen(len(x), f["low"], fs, len(ours))
        y = signal.sosfiltfilt(sos, x, padtype="odd", padlen=pad)
        c.close(f"{f['name']} sosfiltfilt", f["output"], y, atol=1e-8 * np.max(np.abs(y)))

    fw, pw = signal.welch(x, fs=fs, window="hann", nperseg=ref["welch"]["segment"],
                          noverlap=ref["welch"]["overlap"], detrend="constant", scaling="density")
    c.close("welch density", ref["welch"]["density"], pw, rtol=1e-10, atol=1e-14)
    fp, pp = signal.periodogram(x, fs=fs, window="boxcar", detrend=False, scaling="density")
    c.close("periodogram density", ref["periodogram"], pp, rtol=1e-10, atol=1e-14)
    bands = [(f["low"], f["high"]) for f in ref["filters"]]
    c.close("welch band power", ref["welch_band_power"], [band_power(fw, pw, lo, hi, fs) for lo, hi in bands],
            rtol=1e-10)

    recompute_features(c, fx)
    c.finish()


def recompute_features(c, fx):
    ref = json.loads((fx / "features.json").read_text())
    _, trials = read_recording(fx / "synth.eegc")
    _, items = read_features(fx / "features.eegf")
    floor = ref["de_floor"]
    frames = ref["frames_per_sample"]
    bands = [(b[1], b[2]) for b in ref["bands"]]
    by_key = {(it["subject"], it["trial"], it["block"]): it for it in items}
    de_err = psd_err = 0.0
    checked = 0
    for t in trials[:3]:
        fs = t["fs"]
        win = int(round(ref["window_seconds"] * fs))
        seg = int(round(ref["segment_seconds"] * fs))
        nover = int(round(ref["overlap"] * seg))
        blocks = (t["samples"] // win) // frames
        for ch in range(t["channels"]):
            raw = t["data"][ch]
            filtered = []
            for lo, hi in bands:
                sos = signal.butter(4, [lo, hi], btype="band", fs=fs, output="sos")
                filtered.append(signal.sosfiltfilt(sos, raw, padtype="odd", padlen=padlen(len(raw), lo, fs, 4)))
            for w in range(blocks * frames):
                it = by_key[(t["subject"], t["trial"], w // frames)]
                window = raw[w * win:(w + 1) * win]
                fw, pw = signal.welch(window, fs=fs, window="hann", nperseg=seg, noverlap=nover,
                                      detrend="constant")
                for b, (lo, hi) in enumerate(bands):
                    psd = math.log(max(band_power(fw, pw, lo, hi, fs), floor))
                    var = max(np.var(filtered[b][w * win:(w + 1) * win], ddof=1), floor)
                    de = 0.5 * math.log(2 * math.pi * math.e * var)
                    psd_err = max(psd_err, abs(psd - it["psd"][w % frames, b, ch]))
                    de_err = max(de_err, abs(de - it["de"][w % frames, b, ch]))
                    checked += 1
    c.true("framed PSD features", psd_err < 1e-8, f"max err {psd_err:.3g} over {checked} values")
    c.true("framed DE features", de_err < 1e-6, f"max err {de_err:.3g} over {checked} values")


if __name__ == "__main__":
    main()
