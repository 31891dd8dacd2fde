"""Writes the bundled synthetic weather traces (seeded, reproducible).

Usage: python3 scripts/make_weather.py [out_dir]
"""
import csv
import math
import os
import sys

import numpy as np

DAYS = 30
SEED = 20240607
# (bus, mean wind speed m/s, cloudiness bias)
SITES = [(3, 8.6, 0.0), (24, 8.9, 0.05), (4, 8.2, 0.05), (5, 8.3, 0.0), (17, 9.4, -0.05), (18, 9.2, -0.05)]


def wind(rng, mean):
    out = np.zeros((DAYS, 24))
    for d in range(DAYS):
        level = rng.gamma(6.0, mean / 6.0)
        x = 0.0
        for h in range(24):
            x = 0.8 * x + rng.normal(0.0, 0.9)
            diurnal = 1.0 + 0.15 * math.cos(2 * math.pi * (h - 3) / 24)
            out[d, h] = max(0.0, level * diurnal + x)
    return out


def solar(rng, bias):
    out = np.zeros((DAYS, 24))
    for d in range(DAYS):
        clear = min(1.0, max(0.25, rng.beta(4.0, 1.6) - bias))
        for h in range(24):
            s = math.sin(math.pi * (h + 0.5 - 6.0) / 13.0)
            if s <= 0:
                continue
            noise = min(1.0, max(0.1, clear + rng.normal(0.0, 0.08)))
            out[d, h] = 1050.0 * s ** 1.2 * noise
    return out


def write(path, header, values):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["day", "hour", header])
        for d in range(values.shape[0]):
            for h in range(24):
                w.writerow([d, h, f"{values[d, h]:.2f}"])


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "crates/gridflex/data/weather"
    os.makedirs(out, exist_ok=True)
    rng = np.random.default_rng(SEED)
    for bus, mean, bias in SITES:
        write(os.path.join(out, f"wind-{bus}.csv"), "wind_speed_m_s", wind(rng, mean))
        write(os.path.join(out, f"solar-{bus}.csv"), "irradiance_w_m2", solar(rng, bias))


if __name__ == "__main__":
    main()
