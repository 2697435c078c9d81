"""Classify the named fixture points and show what the decision rests on.

Run:  python3 demos/01_fixtures.py
"""

from cubic_strata.classify import classify
from cubic_strata.core import solve_cubic, spectrum
from cubic_strata.fixtures import FIXTURES


def main():
    for name, (p, _, _) in FIXTURES.items():
        st, cert = classify(p)
        lam = spectrum(p, solve_cubic(p))
        print(f"{name:18s} e1={p.e1:<14} e0={p.e0:<24} -> {st}")
        print(f"{'':18s} eigenvalues " + ", ".join(f"{l:.4g}" for l in lam))
        for k, row in enumerate(cert.evidence["landing"], 1):
            print(f"{'':18s}   separatrix {k}: {row[0]} (root {row[1]}, partner {row[2]}, quadrant {row[3]})")
        print(f"{'':18s} certificate digest {cert.digest()}\n")


if __name__ == "__main__":
    main()
