"""Smoke test for the expweight Python extension.

Build and install first:
    pip install --no-build-isolation -e crates/python
"""

import json
import math
import os
import tempfile

import expweight


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    gauss = expweight.Weight.freud(2.0)
    for x in (1.0, 4.0, 9.0):
        assert close(gauss.a(x), math.sqrt(x), 1e-9), (x, gauss.a(x))
    assert close(gauss.t(1.5), 2.0, 1e-12)

    w = expweight.Weight.parse("erdos:0,2,1")
    assert w.label == "erdos:0,2,1"
    assert w.a(8.0) > w.a(4.0) > 0.0

    rec = expweight.Recurrence(gauss, 20)
    for k in range(1, 21):
        assert close(rec.b(k), math.sqrt(k) / 2.0, 1e-10), k

    zeros, lambdas = rec.gauss(10)
    assert len(zeros) == 10 and all(l > 0.0 for l in lambdas)
    # int exp(-2x^2) dx = sqrt(pi / 2)
    assert close(sum(lambdas), math.sqrt(math.pi / 2.0), 1e-12)

    p = expweight.Poly(rec, [0.5, -1.0, 0.25])
    v = expweight.vallee_poussin(rec, p, 3)
    assert all(close(a, b, 1e-10) for a, b in zip(v.coeffs, [0.5, -1.0, 0.25] + [0.0] * 3))

    rec_e = expweight.Recurrence(w, 40)
    errs = {}
    for norm in ("1", "2", "inf"):
        err, poly, info = expweight.best_poly(rec_e, math.sin, 7, norm)
        assert err > 0.0 and not math.isnan(poly(0.3)), (norm, err, info)
        errs[norm] = err
    print("E_7(sin):", ", ".join(f"p={k}: {v:.3e}" for k, v in errs.items()))

    try:
        expweight.best_poly(rec_e, lambda x: 1.0 / 0.0, 3)
    except ZeroDivisionError:
        pass
    else:
        raise AssertionError("callback exception was not propagated")

    with tempfile.TemporaryDirectory() as out:
        cfg = {"n_max": 8, "experiments": ["simultaneous", "mrs_growth"], "output_dir": out}
        report = json.loads(expweight.verify(json.dumps(cfg)))
        assert report["fail_count"] == 0, report["fail_count"]
        assert os.path.isfile(os.path.join(out, "simultaneous.csv"))
        print(f"verify: {report['pass_count']} groups pass, {len(report['rows'])} rows")

    try:
        expweight.verify('{"n_max": 99}')
    except ValueError:
        pass
    else:
        raise AssertionError("bad config accepted")

    assert expweight.cli_main(["verify", "--nmax", "99"]) == 2
    print("smoke test passed")


if __name__ == "__main__":
    main()
