from balancer import balance, extract_forward
from report import (
    SWEEP_COLUMNS,
    balance_summary,
    format_key_values,
    format_sweep,
    increase_pct,
    structure_summary,
    sweep,
)


def test_increase_pct():
    assert increase_pct(7, 8) == 100.0 / 7
    assert increase_pct(4, 4) == 0.0


def test_sweep_banana(banana_rlbwt):
    df = sweep(banana_rlbwt, (2, 4))
    assert list(df.columns) == SWEEP_COLUMNS
    assert df["perm"].tolist() == ["lf/fl", "phi/phi-inv", "lf/fl", "phi/phi-inv"]
    assert df["alpha"].tolist() == [2, 2, 4, 4]
    assert df["r"].tolist() == [5, 5, 5, 5]
    assert df["r_prime"].tolist() == [5, 5, 5, 5]
    assert df["insertions"].tolist() == [0, 0, 0, 0]
    assert (df["seconds"] >= 0).all()


def test_sweep_styles(banana_rlbwt):
    df = sweep(banana_rlbwt, (2,))
    csv = format_sweep(df, "csv")
    assert csv.splitlines()[0] == ",".join(SWEEP_COLUMNS)
    kv = format_sweep(df, "kv").splitlines()
    assert len(kv) == 2
    assert kv[0].startswith("perm=lf/fl alpha=2 r=5 r_prime=5 insertions=0 increase_pct=0 ")
    table = format_sweep(df)
    assert "r_prime" in table.splitlines()[0]


def test_format_key_values():
    assert format_key_values({"a": 1, "b": None, "c": 0.5, "d": "ok"}) == "a=1\nb=na\nc=0.5\nd=ok\n"


def test_summaries(pi_b):
    pair = balance(pi_b, 2)
    values = balance_summary(pair)
    assert values["r"] == 7
    assert values["r_prime"] == 8
    assert values["insertions"] == 1
    assert "seconds" not in values
    assert "seconds" in balance_summary(pair, 0.25)

    summary = structure_summary(extract_forward(pair))
    assert summary == {"n": 12, "r_prime": 8, "alpha": 2, "max_scan": summary["max_scan"]}
    assert summary["max_scan"] < 4
