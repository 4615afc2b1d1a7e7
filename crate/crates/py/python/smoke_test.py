"""Smoke test for the thinlie extension module.

Build and install first:  pip install ./crates/py
Then run:                 python crates/py/python/smoke_test.py
"""

import json

import thinlie


def main():
    f = thinlie.PrimeField(7)
    assert f.mul(3, 5) == 1 and f.inv(3) == 5
    assert thinlie.lucas_binom(50, 8, 7) == 0
    assert thinlie.lucas_binom(50, 49, 7) == 1

    # All diamonds of type -1: dims 2 exactly in degrees 1 mod 6.
    alg = thinlie.compile_family("a", 60)
    assert alg.nominal_degree == 60 and alg.p == 7
    assert [d for d in range(1, 61) if alg.dim(d) == 2] == list(range(1, 61, 6))
    report = alg.validate()
    assert report["checks"] and all(c["passed"] for c in report["checks"])
    assert alg.detect().type_at(13) == "finite:-1"

    # Patterns survive a JSON round trip and compile back to the same algebra.
    pat = thinlie.family_pattern("L0q", 40)
    assert thinlie.DiamondPattern.from_json(pat.to_json()) == pat
    assert pat.normalize().type_at(13) == "fake0"
    assert pat.normalize().type_at(19) == "fake1"
    assert pat.compile(40).is_valid()

    # Maximal class -> tensor construction -> maximal class.
    seq = thinlie.CentralizerSequence.random(7, 20, seed=3)
    t = thinlie.compile_family("tq2", 80, sequence=seq)
    rt = t.roundtrip(60)
    assert rt["pass"], json.dumps(rt)[:400]

    # The simplest deflation: N(7, 7) has its second diamond in degree 7.
    n77 = thinlie.nottingham_nqr(7, 7, 7, 40)
    assert n77.detect().entries[0] == (7, "finite:-1")
    assert n77.regularity()["regularity"] == "irregular"

    data = alg.to_dict()
    assert data["schema_version"] == thinlie.SCHEMA_VERSION

    try:
        thinlie.compile_family("a", 60, q=25)
    except ValueError:
        pass
    else:
        raise AssertionError("q = 25 over F_7 must be rejected")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
