"""Smoke test for the ludics_py extension module.

Build and install it first:

    pip install --no-build-isolation -e crates/py
"""

import ludics_py as lp


def main():
    p = "sig a/1 b/0; x0|a<b().#>"
    n = "a(y).(y|b<>)"

    assert lp.is_orthogonal(p, n)
    assert not lp.is_orthogonal("x0|b<>", n)
    assert lp.interaction_path(p, n) == "x0|a<x0.1> b_x0.1() #"
    assert lp.paths(n) == ["ε", "a_x0(x0.1) x0.1|b<>"]

    nf, status, _ = lp.normalize("[a(y).(y|b<>)]|a<b().#>")
    assert (nf, status) == ("#", "Converged"), (nf, status)

    assert lp.incarnation_sizes("Nat", 3, 8) == [1, 4, 7, 10]
    assert lp.encode_nat(1) == "x0|p2<val(x1).(x1|p1<val(x2).(x2|n<>)>)>"

    assert lp.check_behaviour("up(down(C b))", "regular", 3, 10)["holds"]

    pure = lp.check_functional("Bool (x) Bool")
    assert pure["pure"]["holds"] and pure["criterion_pure"] and pure["agrees"]

    impure = lp.check_functional("(Bool -o Bool) -o Bool")
    assert not impure["pure"]["holds"] and not impure["criterion_pure"] and impure["agrees"]

    w = lp.impurity_witness("(C_u -o C_u) -o Bool")
    assert w["p_actions"] == 11 and w["path_len"] == 11, w

    try:
        lp.paths("x0|a<")
    except ValueError:
        pass
    else:
        raise AssertionError("bad input should raise")

    print("smoke test ok")


if __name__ == "__main__":
    main()
