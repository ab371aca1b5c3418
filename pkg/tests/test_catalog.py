import math

import numpy as np
import pytest

from h1geo.catalog import (
    ENTRIES,
    TORUS_QUAD,
    closed_surface,
    entry,
    list_entries,
    make_region,
    make_surface,
    torus_closed_forms,
    validate_entry,
)
from h1geo.errors import BadParams, CharacteristicPoint, UnknownEntry
from h1geo.surface import characteristic_cells, characteristic_margin, evaluate_frame


def test_unknown_entry():
    with pytest.raises(UnknownEntry):
        make_surface("klein_bottle")
    with pytest.raises(KeyError):
        entry("sphere")
    with pytest.raises(UnknownEntry):
        make_region("annulus", {"surface": "vertical_plane"})


@pytest.mark.parametrize("name,params", [
    ("torus_revolution", {"R": 1.0, "rho": 1.0}),
    ("torus_revolution", {"R": 1.0, "rho": 2.0}),
    ("torus_revolution", {"rho": -0.5}),
    ("torus_revolution", {"R": float("nan")}),
    ("vertical_cylinder", {"r": 0.0}),
    ("vertical_cylinder", {"r": -1.0}),
    ("vertical_cylinder", {"height": [1.0, 0.0]}),
    ("vertical_plane", {"domain": [1.0, -1.0, 0.0, 1.0]}),
    ("graph_xy", {"domain": [0.0, 1.0]}),
    ("perturbed_torus", {"eps_p": 1.5}),
    ("perturbed_torus", {"k_p": 2.5}),
    ("perturbed_torus", {"rho": 1.9}),
    ("torus_revolution", {"radius": 3.0}),
    ("torus_revolution", {"sigma": 0}),
])
def test_bad_params(name, params):
    with pytest.raises(BadParams):
        make_surface(name, params)


@pytest.mark.parametrize("name", sorted(ENTRIES))
@pytest.mark.parametrize("sigma", [1, -1])
def test_validation(name, sigma):
    e = entry(name)
    patch = make_surface(name, {"sigma": sigma}, validate=False)
    rep = validate_entry(e, patch, seed=3)
    if e.known is not None:
        assert rep["known_values_error"] <= 1e-10
    if e.closed:
        assert rep["min_margin"] > 0.4


def test_graph_crossing_zero():
    patch = make_surface("graph_xy", {"domain": [-1.0, 1.0, -1.0, 1.0]})
    rep = validate_entry(entry("graph_xy"), patch)
    assert rep["known_values_error"] <= 1e-10
    assert np.all(characteristic_margin(patch, np.zeros(3), np.zeros(3)) == 0)


def test_torus_closed_forms_by_hand():
    # at th = 0 the tube is vertical: N = 1, A = 0 and K = 1/(rho (R + rho))
    f = torus_closed_forms(np.array([0.7]), np.array([0.0]), 1, 2.0, 0.5)
    assert abs(f["A"][0]) <= 1e-15
    assert abs(f["K"][0] - 1 / (0.5 * 2.5)) <= 1e-14
    assert abs(f["cos_alpha"][0] - math.cos(0.7)) <= 1e-15
    fp = evaluate_frame(make_surface("torus_revolution"), 0.7, 0.0)
    assert abs(float(fp.K) - 0.8) <= 1e-14


def test_listing():
    names = [e["name"] for e in list_entries()]
    assert names == sorted(ENTRIES)
    summary = entry("vertical_cylinder").summary()
    assert summary["periods"] == ["2pi", None]
    assert "A" in summary["known_values"]


def test_regions():
    quad = make_region("torus_quad")
    assert len(quad.corners()) == 4 and len(quad.curves) == 4
    assert quad.curves[0].start == TORUS_QUAD[0]
    band = make_region("cylinder_band", {"t0": 0.2, "t1": 0.7})
    assert abs(band.cell_area - 2 * math.pi * 0.5) <= 1e-15
    rect = make_region("rectangle", {"surface": "torus_revolution", "bounds": [0.3, 0.8, 0.1, 0.5]})
    assert rect.orientation == 1
    disk = make_region("disk", {"surface": "vertical_plane", "center": [0, 0], "radius": 0.5})
    assert abs(disk.cell_area - math.pi / 4) <= 1e-15
    with pytest.raises(BadParams):
        make_region("rectangle", {"surface": "torus_revolution"})
    with pytest.raises(BadParams):
        make_region("torus_quad", {"colour": "red"})
    with pytest.raises(BadParams):
        make_region("cylinder_band", {"t0": 0.7, "t1": 0.2})
    with pytest.raises(BadParams):
        make_region("disk", {"center": [0, 0], "radius": 1})


def test_closed_surface_tiles():
    s = closed_surface("torus_revolution", tiles=(3, 2))
    assert len(s.patches) == 6 and len(s.gluings) == 12
    s.check_closed()
    with pytest.raises(BadParams):
        closed_surface("torus_revolution", tiles=(0, 2))


def test_characteristic_torus_is_rejected():
    # a thin, strongly perturbed tube acquires characteristic points
    params = {"R": 1.0, "rho": 0.5, "eps_p": 0.9, "k_p": 12}
    with pytest.raises(CharacteristicPoint) as info:
        make_surface("perturbed_torus", params)
    # the grid never lands on one; the winding of (e0(d/du), e0(d/dv)) finds them
    patch = make_surface("perturbed_torus", params, validate=False)
    cells = characteristic_cells(patch, 200, 200)
    assert cells and info.value.where == cells[0][:2]
    # indices of a 1-form on a torus add up to its Euler characteristic
    assert sum(c[2] for c in cells) == 0
    u, v, _ = cells[0]
    assert np.min(characteristic_margin(patch, u + np.linspace(-0.02, 0.02, 201)[:, None],
                                        v + np.linspace(-0.02, 0.02, 201)[None, :])) <= 2e-3
