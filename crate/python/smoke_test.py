"""Smoke test for the asmcap Python module.

Build first:  pip install -e crates/py --no-build-isolation
Run:          python python/smoke_test.py
"""

import tempfile
from pathlib import Path

import asmcap


def main() -> None:
    assert asmcap.distinguishable_states(0.014) == 566
    assert asmcap.mismatch_count("AAAA", "AGAA", "ed_star") == 0
    assert asmcap.mismatch_count("AAAA", "AGAA", "hd") == 1
    assert asmcap.edit_distance("AAAA", "AGAA") == 1

    a = asmcap.ErrorProfile.condition("A")
    b = asmcap.ErrorProfile.condition("B")
    print(f"hdac p(A, T=1) = {asmcap.hdac_probability(a, 1):.5f}")
    print(f"tasr T_l(B) = {asmcap.tasr_lower_bound(b)}")

    ds = asmcap.generate("B", n_reads=128, n_rows=256, seed=7)
    report = ds.evaluate(list(range(1, 11)), "plain_ed_star,hdac,tasr", seed=7)
    print(report.csv(), end="")
    ts = list(range(6, 11))
    print(f"mean F1 T=6..10: plain {report.mean_f1('plain_ed_star', ts):.4f}, tasr {report.mean_f1('tasr', ts):.4f}")

    with tempfile.TemporaryDirectory() as d:
        ds.write(d)
        names = sorted(p.name for p in Path(d).iterdir())
        assert names == ["array.img", "reads.tsv", "reference.fa"], names

    print("smoke test ok")


if __name__ == "__main__":
    main()
