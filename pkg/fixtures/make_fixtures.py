"""Regenerate the shipped fixture files next to this script.

Everything here is deterministic, so a rerun reproduces the committed
files byte for byte.  The basis rows are synthetic eigenforms whose
declared eigenvalues the loader replays literally; the curve is held by
its a-invariants and the point by exact digit vectors.
"""

import json
from pathlib import Path

from thetafam.characters import character_to_spec, dual_generator
from thetafam.padic import Zp2
from thetafam.quadfield import QuadField
from thetafam.synth import synthetic_eigenform
from thetafam.tate import TateCurve
from thetafam.theta import default_instance

HERE = Path(__file__).parent


def dump(name, payload):
    (HERE / name).write_text(
        json.dumps(payload, sort_keys=True, indent=1) + "\n")


def characters():
    field, group, eta1, lam = default_instance()
    eta2 = eta1.sigma() ** (-1)
    dump("eta1.json", character_to_spec(eta1))
    dump("eta2.json", character_to_spec(eta2))


def eigendata():
    dump("eigendata.json", {
        "schema": 1,
        "label": "weight-2 p-new corner target",
        "level_tame": 2,
        "s": 1,
        "weight": 2,
        "eta_f": 6,
        "corner_a_p": 1,
        "p_new": True,
        "eigen": {"2": 3, "3": 2},
    })


def basis():
    ctx = Zp2(5, 12)
    rows = []
    eigen_sets = ({2: ctx(1), 3: ctx(1)},
                  {2: ctx(2), 3: ctx(3)},
                  {2: ctx(3), 3: ctx(7)})
    for i, eigen in enumerate(eigen_sets, start=1):
        xi, meta = synthetic_eigenform(ctx, f"cli:E{i}", 4, 60, level=14,
                                       eigen=eigen)
        rows.append({
            "label": f"cli:E{i}",
            "coeffs": [[c.c0, c.c1] for c in xi.coeffs],
            "eigen": {str(ell): meta[ell].c0
                      for ell in (2, 3, 7, 11, 13)},
            "a_p": meta["a_p"].c0,
        })
    dump("basis.json", {
        "schema": 1,
        "p": 5,
        "precision": 12,
        "level": 14,
        "weight": 4,
        "elements": rows,
    })


def tate_pair():
    curve = TateCurve(5, 1, a_invariants=[1, 1, 1, -10, -10])
    dump("curve.json", curve.descriptor())
    ctx = Zp2(curve.p, curve.q_E.prec)
    u = ctx(2)
    dump("heegner.json", {
        "u": u.to_digits(),
        "u_frob": u.to_digits(),
        "quadratic": True,
        "phi1_at_p": 1,
        "label": "rational point, doubled line",
    })


CONFIG = """\
[instance]
p = 5
precision = 8
q_cap = 200
series_cap = 4

[field]
d_K = 7

[characters]
eta1 = "eta1.json"
eta2 = "eta2.json"

[family]
kind = "col"

[target]
eigen_data = "eigendata.json"
basis = "basis.json"

[triple]
line = "k11"
fudge = [[3, 11], [7, 16]]

[tate]
curve = "curve.json"
point = "heegner.json"

[output]
dir = "out"
cache = "out/.cache"
"""


def main():
    characters()
    eigendata()
    basis()
    tate_pair()
    (HERE / "config.toml").write_text(CONFIG)
    print(f"fixtures written under {HERE}")


if __name__ == "__main__":
    main()
