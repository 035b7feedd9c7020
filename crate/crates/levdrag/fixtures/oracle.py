"""Computes the fixture's expected statistics with numpy and writes expected.toml.

Conventions: F = 252 trading days; population variance; rates are decimal
fractions (annualized unless the key says daily). Zero days are index returns
with |R| <= 1e-12. Under "assign" a zero day gets ratio k and contributes
R_etf - k*R to the residual; under "exclude" it is dropped. Winsorized
ratios are clamped to the order statistics of rank floor(q*n/100)+1 and
ceil(p*n/100).

Run from this directory after generate.py: python3 oracle.py
"""

import math

import numpy as np

F = 252.0
MULTIPLES = {"lev1": 1.0, "lev2": 2.0, "lev3": 3.0}
THRESHOLD = 1e-12
WINSOR = (5.0, 95.0)


def returns(name):
    closes = np.loadtxt(f"{name}.csv", delimiter=",", skiprows=1, usecols=1)
    return (closes[1:] - closes[:-1]) / closes[:-1]


def approx_annual(mean_daily, vol_daily):
    g = (1.0 + mean_daily) * math.exp(-vol_daily**2 / 2.0) - 1.0
    return math.expm1(F * math.log1p(g))


def summary(r):
    log_growth = float(np.sum(np.log1p(r)))
    mean = float(np.mean(r))
    vol = float(np.std(r))
    geo_daily = math.expm1(log_growth / len(r))
    return {
        "days": len(r),
        "cumulative_return": math.expm1(log_growth),
        "geometric_annualized": math.expm1(F * math.log1p(geo_daily)),
        "arithmetic_annualized": mean * F,
        "volatility_annualized": vol * math.sqrt(F),
        "risk_adjusted": mean * F / (vol * math.sqrt(F)),
    }


def decomposition(idx, etf, k, mode, winsor=None):
    zero = np.abs(idx) <= THRESHOLD
    n_all = len(idx)
    if mode == "exclude":
        keep = ~zero
        lam = etf[keep] / idx[keep]
        r, e = idx[keep], etf[keep]
        residual = 0.0
    else:
        safe = np.where(zero, 1.0, idx)
        lam = np.where(zero, k, etf / safe)
        r, e = idx, etf
        residual = float(np.sum((etf - k * idx)[zero])) / n_all
    if winsor is not None:
        s = np.sort(lam)
        n = len(s)
        hi_rank = min(max(math.ceil(winsor[1] * n / 100.0), 1), n)
        lo_rank = min(max(math.floor(winsor[0] * n / 100.0) + 1, 1), hi_rank)
        lam = np.clip(lam, s[lo_rank - 1], s[hi_rank - 1])
    mean_ratio = float(np.mean(lam))
    cov = float(np.cov(lam, r, bias=True)[0, 1])
    e_ann = float(np.mean(r)) * F
    v_ann = float(np.std(r)) * math.sqrt(F)

    def cl(m):
        return approx_annual(m * e_ann / F, abs(m) * v_ann / math.sqrt(F))

    return {
        "days": len(lam),
        "zero_days": int(np.sum(zero)),
        "mean_ratio": mean_ratio,
        "ratio_volatility_annualized": float(np.std(lam)) * math.sqrt(F),
        "etf_mean_annualized": float(np.mean(e)) * F,
        "covariance_annualized": cov * F,
        "residual_annualized": residual * F,
        "etf_geometric_annualized": math.expm1(float(np.sum(np.log1p(e))) / len(e) * F),
        "ideal_estimate_annualized": cl(k),
        "empirical_cl_estimate_annualized": cl(mean_ratio),
        "empirical_estimate_annualized": approx_annual(float(np.mean(e)), float(np.std(e))),
    }


def emit(out, header, values):
    out.append(f"[{header}]")
    for key, v in values.items():
        out.append(f"{key} = {v!r}" if isinstance(v, float) else f"{key} = {v}")
    out.append("")


def main():
    idx = returns("index")
    out = ["# Generated by oracle.py from the fixture price files. Do not edit.", ""]
    emit(out, "summary.index", summary(idx))
    for name, k in MULTIPLES.items():
        emit(out, f"summary.{name}", summary(returns(name)))
    for name, k in MULTIPLES.items():
        etf = returns(name)
        emit(out, f"assign.{name}", decomposition(idx, etf, k, "assign"))
        emit(out, f"exclude.{name}", decomposition(idx, etf, k, "exclude"))
        emit(out, f"winsorized.{name}", decomposition(idx, etf, k, "assign", WINSOR))
    with open("expected.toml", "w") as f:
        f.write("\n".join(out))


if __name__ == "__main__":
    main()
