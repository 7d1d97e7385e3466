import numpy as np
import pytest

from cubiclam.cubic import CubicMap, escape_iterations, root_of_unity, BOUNDED
from cubiclam.export import draw_polyline, ppm_bytes
from cubiclam.render import (
    WORKERS_ENV,
    Window,
    default_workers,
    escape_palette,
    render_dynamic,
    render_slice,
)

LAM3 = root_of_unity(1, 3)


class TestWindow:
    def test_parse(self):
        assert Window.parse("-2,-1.5,2,1.5") == Window(-2, -1.5, 2, 1.5)
        for bad in ("1,2,3", "0,0,0,1", "a,b,c,d"):
            with pytest.raises(ValueError):
                Window.parse(bad)

    def test_pixel_centers(self):
        xs, ys = Window(0, 0, 4, 2).pixel_centers(4, 2)
        assert xs.tolist() == [0.5, 1.5, 2.5, 3.5]
        assert ys.tolist() == [1.5, 0.5]  # row 0 on top

    def test_pixel_of(self):
        w = Window(-2, -2, 2, 2)
        assert w.pixel_of(0, 4, 4) == (2, 2)
        assert w.pixel_of(-1.9 + 1.9j, 4, 4) == (0, 0)
        with pytest.raises(ValueError):
            w.pixel_of(3, 4, 4)


class TestSlice:
    def test_matches_pointwise_escape(self):
        win = Window(-2, -2, 2, 2)
        img = render_slice(0.3 + 0.2j, win, (12, 10), max_iter=60, workers=1)
        xs, ys = win.pixel_centers(12, 10)
        for j in range(10):
            for i in range(12):
                f = CubicMap(0.3 + 0.2j, xs[i] + 1j * ys[j])
                inside = all(escape_iterations(f, w, 60) is BOUNDED for w in f.critical_points)
                assert img.in_set[j, i] == inside

    def test_worker_determinism(self):
        win = Window(-3, -3, 3, 3)
        imgs = [render_slice(LAM3, win, (64, 48), max_iter=80, workers=n) for n in (1, 2, 8)]
        data = [ppm_bytes(im.rgb()) for im in imgs]
        assert data[0] == data[1] == data[2]

    def test_bad_resolution(self):
        with pytest.raises(ValueError):
            render_slice(0, Window(-1, -1, 1, 1), (0, 5))


class TestDynamic:
    def test_unit_disk(self):
        img = render_dynamic(CubicMap(0, 0), Window(-2, -2, 2, 2), (64, 64), max_iter=100, workers=2)
        assert img.in_set[32, 32]
        assert not img.in_set[0, 0]


class TestOutput:
    def test_ppm_header(self):
        rgb = escape_palette(np.array([[-1, 0, 5]]), 10)
        data = ppm_bytes(rgb)
        assert data.startswith(b"P6\n3 1\n255\n")
        assert len(data) == len(b"P6\n3 1\n255\n") + 9
        assert data[-9:-6] == b"\x00\x00\x00"

    def test_ppm_rejects_float(self):
        with pytest.raises(ValueError):
            ppm_bytes(np.zeros((2, 2, 3)))

    def test_polyline(self):
        rgb = np.zeros((5, 5, 3), dtype=np.uint8)
        draw_polyline(rgb, [(0.5, 0.5), (4.5, 4.5)], color=(1, 2, 3))
        assert all(tuple(rgb[k, k]) == (1, 2, 3) for k in range(5))


class TestWorkers:
    def test_env(self, monkeypatch):
        monkeypatch.delenv(WORKERS_ENV, raising=False)
        assert default_workers() == 1
        monkeypatch.setenv(WORKERS_ENV, "4")
        assert default_workers() == 4
        for bad in ("0", "x"):
            monkeypatch.setenv(WORKERS_ENV, bad)
            with pytest.raises(ValueError):
                default_workers()
