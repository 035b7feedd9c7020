"""Writes the synthetic price panel used by the fixture tests.

Four weekday price files from 2022-01-03, 502 closes each (501 returns):
index.csv and lev1/lev2/lev3.csv for ETFs with target multiples 1, 2, 3.
Index returns are iid normal with 1.917%/yr mean and 19.40%/yr volatility.
ETF returns follow (k + a*R + eps) * R with a negative timing coefficient.
Index return number 100 is exactly zero (the close repeats); the ETFs still
move that day.

Run from this directory: python3 generate.py
"""

import datetime as dt

import numpy as np

DAYS = 501
ZERO_DAY = 100
ETFS = {"lev1": (1.0, -0.5, 0.02, 0.0001), "lev2": (2.0, -3.0, 0.05, 0.0003), "lev3": (3.0, -6.0, 0.08, -0.0004)}


def weekdays(start, n):
    out, d = [], start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += dt.timedelta(days=1)
    return out


def write(name, dates, closes):
    with open(f"{name}.csv", "w") as f:
        f.write("date,close\n")
        for d, c in zip(dates, closes):
            f.write(f"{d.isoformat()},{float(c)!r}\n")


def main():
    rng = np.random.default_rng(20240501)
    dates = weekdays(dt.date(2022, 1, 3), DAYS + 1)
    r = rng.normal(0.01917 / 252, 0.1940 / np.sqrt(252), DAYS)
    r[ZERO_DAY] = 0.0
    index = 100.0 * np.concatenate([[1.0], np.cumprod(1.0 + r)])
    index[ZERO_DAY + 1] = index[ZERO_DAY]
    write("index", dates, index)
    for name, (k, a, noise, orphan) in ETFS.items():
        lam = k + a * r + rng.normal(0.0, noise, DAYS)
        etf = lam * r
        etf[ZERO_DAY] = orphan
        write(name, dates, 50.0 * np.concatenate([[1.0], np.cumprod(1.0 + etf)]))


if __name__ == "__main__":
    main()
