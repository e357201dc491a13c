"""Walking from a sphere to a cube three different ways.

Each interpolant produces a cloud S at ratio lam.  If S sits on a shortest
path, the distances to the endpoints split d(a, b) in proportion:
d(a, S) = lam * d(a, b) and d(S, b) = (1 - lam) * d(a, b).  The table shows
how well each of the three mixing rules keeps that promise.

    python3 demos/shortest_path.py
"""

import numpy as np

from pointmixup.emd import emd_exact
from pointmixup.interpolation import mix_oa, mix_ps, mix_ra
from pointmixup.synthetic import sample_shape

N = 400


def main():
    rng = np.random.default_rng(0)
    a = sample_shape("sphere", N, rng)
    b = sample_shape("cube", N, rng)
    d12 = emd_exact(a, b).distance
    print(f"d(sphere, cube) = {d12:.4f}  (N = {N})\n")

    rules = {
        "OA": lambda lam: mix_oa(a, b, lam)[0],
        "RA": lambda lam: mix_ra(a, b, lam, rng),
        "PS": lambda lam: mix_ps(a, b, lam, rng),
    }
    print("lam   rule  d(a,S)/D  d(S,b)/D  slack")
    for lam in (0.25, 0.5, 0.75):
        for name, rule in rules.items():
            s = rule(lam)
            da = emd_exact(a, s).distance / d12
            db = emd_exact(s, b).distance / d12
            print(f"{lam:<5} {name:<5} {da:8.4f}  {db:8.4f}  {round(da + db - 1, 4) + 0.0:+.4f}")
        print()

    # the OA path is also linear: two interpolants are (l2 - l1) * D apart
    s1, _ = mix_oa(a, b, 0.2)
    s2, _ = mix_oa(a, b, 0.7)
    print(f"OA d(S_0.2, S_0.7) / D = {emd_exact(s1, s2).distance / d12:.6f}  (expected 0.5)")


if __name__ == "__main__":
    main()
