"""Smoke test for the fweight extension module. Run after `pip install crates/py`."""

from fractions import Fraction

import fweight


def main():
    w = fweight.Weights.length(4)
    assert w.mode == "length-scaled" and w.depth == 4
    assert w.weight("01") == Fraction(1, 4)

    a = ["0", "00", "01"]
    assert fweight.dwt(a, w) == Fraction(1)
    value, witness = fweight.pwt(a, w)
    assert value == Fraction(1, 2) and witness == ["0"]

    b = ["00", "01", "10"]
    for mode, bound in [("convex", 0), ("bounded", 2), ("brute", 1)]:
        v, _ = fweight.vwt(b, w, mode, bound)
        assert v == Fraction(3, 4), (mode, v)

    cover = fweight.good_cover(["011", "0", "1", "11"], w)
    assert cover == ["e", "0", "011"], cover

    t = fweight.Weights.table(1, {"e": Fraction(1), "0": Fraction(1, 3), "1": "1/2"})
    assert not t.is_convex()
    assert fweight.vwt(["0", "1"], t, "brute", 0) == (Fraction(5, 6), ["0", "1"])
    # heavier children: covering by the root is cheaper
    u = fweight.Weights.table(1, {"e": 1, "0": Fraction(2, 3), "1": "1/2"})
    assert u.is_convex()
    assert fweight.vwt(["0", "1"], u) == (Fraction(1), ["e"])

    words = fweight.kraft_chaitin([("a", 1), ("b", 2), ("c", 2)])
    assert words == [("a", "0"), ("b", "10"), ("c", "11")], words
    try:
        fweight.kraft_chaitin([("a", 1), ("b", 1), ("c", 3)])
    except ValueError:
        pass
    else:
        raise AssertionError("overfull request list accepted")

    assert fweight.int_normalize(Fraction(7, 2), 3) == 4
    assert fweight.int_normalize(-5, 3) == 1

    v = fweight.levin_system({"0": "1", "00": "10", "1": "0"})
    assert v["e"] == ["0", "1"] and v["1"] == ["0"] and v["10"] == ["00"], v

    instances, failures = fweight.dnr_sweep(1, 2, 2)
    assert instances > 0 and failures == 0

    for name, checks, failures in fweight.selftest(5):
        assert failures == 0, name
    print("smoke test ok")


if __name__ == "__main__":
    main()
