"""Smoke test for the stormctl extension module.

Build and install first:  pip install --no-build-isolation ./crates/python
"""

import math
import tempfile
from pathlib import Path

import stormctl


def main() -> None:
    assert stormctl.min_ipg(1_000_000_000) == 96.0

    model = stormctl.PtrModel(10.0, 2000.0, 2.0)
    assert model.eval(0.0) == 0.0
    assert math.isclose(model.b, 2 * math.pi * 10.0)
    curve = model.build_array(0.0, 1.0, 0.1)
    assert len(curve) == 11 and max(v for _, v in curve) <= 2000.0

    fitted, rmse = stormctl.fit(stormctl.dataset("table3"))
    assert rmse > 0 and fitted.m != 0
    print(f"table3 fit: {fitted!r} rmse={rmse:.1f}")

    quiet = stormctl.detect(stormctl.dataset("table4"), stormctl.dataset("table4"))
    assert not quiet["storm_found"]
    storm = stormctl.detect(stormctl.dataset("table1"), stormctl.dataset("table4"))
    assert storm["tickets"][0]["cause"] == "ptr_deviation"

    assert stormctl.detect_ipid_loop([(7, 0.0), (7, 0.2), (7, 0.4)], 3, 1.0) == [7]
    assert stormctl.utilization(70.0, 100.0)["band"] == "storm"

    assert "table5-control" in stormctl.scenarios()
    with tempfile.TemporaryDirectory() as tmp:
        summary = stormctl.simulate("table5-control", out_dir=tmp)
        assert summary["max_tnbp_mb"] <= 2.5
        assert (Path(tmp) / "trace.csv").exists()
    free = stormctl.simulate("table5-control", agents=False)
    assert free["max_tnbp_mb"] > 2.5

    try:
        stormctl.PtrModel(1.0, 1.0, 0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("m = 0 accepted")
    print("smoke test ok")


if __name__ == "__main__":
    main()
