import numpy as np

from trapcodes import plotting
from trapcodes.codes import trapezoid_code
from trapcodes.mapping import brute_force_map, build_induced_graph, hardware_graph
from trapcodes.penalty import SweepRow, fit_gap_scaling


def test_gap_sweep_figure(tmp_path):
    rows = [SweepRow(m, 1, 2 * m, m, 2 ** (m - 1), 1.6 * m**-1.03, "reduced-dense") for m in range(3, 9)]
    fits = {"l=1": fit_gap_scaling([(r.m, r.gap) for r in rows], "power")}
    out = plotting.plot_gap_sweep(rows, str(tmp_path / "gap.png"), fits)
    assert (tmp_path / "gap.png").stat().st_size > 0
    assert out.endswith("gap.png")


def test_graph_figures(tmp_path):
    hw = hardware_graph("kagome")
    plotting.plot_hardware(hw, str(tmp_path / "hw.png"))
    g = build_induced_graph(trapezoid_code(4, 1))
    plotting.plot_induced(g, str(tmp_path / "induced.png"))
    vec, _ = brute_force_map(g, hardware_graph("union_jack"))
    plotting.plot_mapping(g, hardware_graph("union_jack"), vec, str(tmp_path / "map.png"))
    for name in ("hw.png", "induced.png", "map.png"):
        assert (tmp_path / name).stat().st_size > 0


def test_positions_fallback():
    from trapcodes.mapping import HardwareGraph

    bare = HardwareGraph("ring", [0, 1, 2], [(0, 1), (1, 2), (0, 2)])
    pos = plotting._hardware_positions(bare)
    assert len(pos) == 3
    assert all(np.isfinite(p).all() for p in map(np.asarray, pos.values()))
