"""Hand-rolled checks kept import-free on purpose."""


def check(got, expected):
    assert got == expected


def test_clamp_bounds():
    check(min(9, max(1, 64)), 9)
    check(max(0, min(-3, 64)), 0)


def test_midpoint_center():
    center = ((0 + 2) * 0.5, (0 + 4) * 0.5)
    check(center, (1.0, 2.0))
