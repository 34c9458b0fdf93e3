"""Deterministic SVG flower glyphs.

Twelve teardrop petals at 30-degree steps around a center circle; the area
of every region is proportional to the category's event rate, so a region's
linear scale is the square root of rate / reference_rate.  Serious events
are the same shape again, shrunk by sqrt(serious / total) and darker.

The canonical unit petal is a closed pair of mirrored quadratic curves from
the origin to the apex (0, -1), widest (0.42) near 60% of its length:

    M 0 0 Q 0.42 -0.7 0 -1 Q -0.42 -0.7 0 0 Z

Petal paths are emitted with absolute coordinates (no transform attributes)
formatted to 3 decimals, so identical inputs give byte-identical SVG and
tests can re-measure areas straight from the path data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib.resources import files

from .normalization import AdeProfile

#: Unit petal geometry: start point, right control, apex, left control.
UNIT_PETAL_CONTROL = (0.42, -0.7)
UNIT_PETAL_APEX = (0.0, -1.0)
UNIT_PETAL_PATH = "M 0 0 Q 0.42 -0.7 0 -1 Q -0.42 -0.7 0 0 Z"
#: Exact enclosed area of the unit petal (two mirrored quadratics).
UNIT_PETAL_AREA = 0.28

#: Linear scale used for the hairline outline that stands in for zero rates.
HAIRLINE_SCALE = 0.05

PETAL_COUNT = 12


class GlyphError(ValueError):
    pass


@dataclass(frozen=True)
class CategoryStyle:
    category_id: str
    petal_index: int | None  # None marks the center category
    fill_color: str
    serious_fill_color: str


@dataclass(frozen=True)
class GlyphSpec:
    """One glyph to draw.  ``reference_rate`` is the rate mapped to the
    maximum petal area and must be shared by every glyph of a comparison
    view, and must not be below any displayed category rate."""

    profile: AdeProfile
    reference_rate: float
    canvas_px: int = 520
    caption: str = ""

    def __post_init__(self):
        if self.reference_rate <= 0:
            raise GlyphError("reference_rate must be positive")
        if self.canvas_px < 16:
            raise GlyphError("canvas too small")


def load_styles(text: str) -> dict[str, CategoryStyle]:
    """Parse ``category_id|petal_index_or_center|fill_hex|serious_hex`` lines
    and check the 12-petals-plus-one-center layout."""
    styles: dict[str, CategoryStyle] = {}
    seen_indexes: set[int] = set()
    centers = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split("|")]
        if len(fields) != 4:
            raise GlyphError(f"style line {line_no}: expected 4 fields")
        cid, pos, fill, serious = fields
        if cid in styles:
            raise GlyphError(f"style line {line_no}: duplicate category {cid!r}")
        if pos == "center":
            petal_index = None
            centers += 1
        else:
            petal_index = int(pos)
            if not 0 <= petal_index < PETAL_COUNT:
                raise GlyphError(f"style line {line_no}: petal index out of range")
            if petal_index in seen_indexes:
                raise GlyphError(f"style line {line_no}: petal index {petal_index} reused")
            seen_indexes.add(petal_index)
        styles[cid] = CategoryStyle(cid, petal_index, fill, serious)
    if centers != 1 or len(seen_indexes) != PETAL_COUNT:
        raise GlyphError(
            f"styles must define exactly {PETAL_COUNT} petals and one center"
        )
    return styles


def default_styles() -> dict[str, CategoryStyle]:
    text = files("ade_miner.data").joinpath("glyph_styles.txt").read_text("utf-8")
    return load_styles(text)


def darken(hex_color: str, toward_black: float = 0.45) -> str:
    """Blend a #RRGGBB color toward black; the default is the serious shade."""
    r, g, b = (int(hex_color[i : i + 2], 16) for i in (1, 3, 5))
    f = 1.0 - toward_black
    return "#%02X%02X%02X" % (round(r * f), round(g * f), round(b * f))


def default_canvas_px(n_glyphs: int) -> int:
    """Glyphs shrink as their number grows."""
    if n_glyphs < 1:
        raise GlyphError("need at least one glyph")
    return max(140, 520 // math.ceil(math.sqrt(n_glyphs)))


def shared_reference_rate(profiles: list[AdeProfile]) -> float:
    """The comparison view's scale: the largest category rate on display."""
    top = 0.0
    for profile in profiles:
        for rates in profile.categories.values():
            top = max(top, rates.total)
    return top if top > 0 else 1.0


def _fmt(value: float) -> str:
    text = f"{value:.3f}"
    return "0.000" if text == "-0.000" else text


def _petal_path(cx: float, cy: float, angle_deg: float, scale: float) -> str:
    """Absolute-coordinate path for one petal: rotation is clockwise from
    the upward vertical (SVG y grows downward)."""
    theta = math.radians(angle_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)

    def place(x: float, y: float) -> tuple[float, float]:
        xs, ys = x * scale, y * scale
        return (cx + xs * cos_t - ys * sin_t, cy + xs * sin_t + ys * cos_t)

    rcx, rcy = UNIT_PETAL_CONTROL
    ax, ay = UNIT_PETAL_APEX
    p_rc = place(rcx, rcy)
    p_apex = place(ax, ay)
    p_lc = place(-rcx, rcy)
    return (
        f"M {_fmt(cx)} {_fmt(cy)} "
        f"Q {_fmt(p_rc[0])} {_fmt(p_rc[1])} {_fmt(p_apex[0])} {_fmt(p_apex[1])} "
        f"Q {_fmt(p_lc[0])} {_fmt(p_lc[1])} {_fmt(cx)} {_fmt(cy)} Z"
    )


def _ordered_styles(styles: dict[str, CategoryStyle]) -> tuple[list[CategoryStyle], CategoryStyle]:
    petals = sorted(
        (s for s in styles.values() if s.petal_index is not None),
        key=lambda s: s.petal_index,
    )
    center = next(s for s in styles.values() if s.petal_index is None)
    return petals, center


def _check_coverage(spec: GlyphSpec, styles: dict[str, CategoryStyle]) -> None:
    missing = set(spec.profile.categories) - set(styles)
    if missing:
        raise GlyphError(f"no style for categories {sorted(missing)}")
    top = max((r.total for r in spec.profile.categories.values()), default=0.0)
    if top > spec.reference_rate * (1 + 1e-12):
        raise GlyphError(
            f"reference_rate {spec.reference_rate} below max category rate {top}"
        )


def _glyph_elements(spec: GlyphSpec, styles: dict[str, CategoryStyle], wireframe: bool) -> list[str]:
    petals, center = _ordered_styles(styles)
    cx = cy = spec.canvas_px / 2.0
    r_max = 0.45 * spec.canvas_px
    elements: list[str] = []

    for style in petals:
        rates = spec.profile.categories.get(style.category_id)
        total = rates.total if rates else 0.0
        serious = rates.serious if rates else 0.0
        angle = style.petal_index * 30.0
        if total <= 0:
            path = _petal_path(cx, cy, angle, HAIRLINE_SCALE * r_max)
            if wireframe:
                elements.append(
                    f'<path class="wire" d="{path}" fill="none" '
                    f'stroke="#000000" stroke-width="1.2"/>'
                )
            else:
                elements.append(
                    f'<path class="petal" data-category="{style.category_id}" '
                    f'data-total="0.000" data-serious="0.000" d="{path}" '
                    f'fill="none" stroke="#999999" stroke-width="0.5"/>'
                )
            continue
        scale = math.sqrt(total / spec.reference_rate) * r_max
        path = _petal_path(cx, cy, angle, scale)
        if wireframe:
            elements.append(
                f'<path class="wire" d="{path}" fill="none" '
                f'stroke="#000000" stroke-width="1.2"/>'
            )
        else:
            elements.append(
                f'<path class="petal" data-category="{style.category_id}" '
                f'data-total="{_fmt(total)}" data-serious="{_fmt(serious)}" '
                f'd="{path}" fill="{style.fill_color}" stroke="none"/>'
            )
            if serious > 0:
                inner = scale * math.sqrt(serious / total)
                inner_path = _petal_path(cx, cy, angle, inner)
                elements.append(
                    f'<path class="petal-serious" data-category="{style.category_id}" '
                    f'd="{inner_path}" fill="{style.serious_fill_color}" stroke="none"/>'
                )

    rates = spec.profile.categories.get(center.category_id)
    total = rates.total if rates else 0.0
    serious = rates.serious if rates else 0.0
    if total <= 0:
        if wireframe:
            elements.append(
                f'<circle class="wire" cx="{_fmt(cx)}" cy="{_fmt(cy)}" '
                f'r="{_fmt(HAIRLINE_SCALE * r_max)}" fill="none" stroke="#000000" '
                f'stroke-width="1.2"/>'
            )
        else:
            elements.append(
                f'<circle class="center" data-category="{center.category_id}" '
                f'data-total="0.000" data-serious="0.000" cx="{_fmt(cx)}" cy="{_fmt(cy)}" '
                f'r="{_fmt(HAIRLINE_SCALE * r_max)}" fill="none" stroke="#999999" '
                f'stroke-width="0.5"/>'
            )
    else:
        radius = math.sqrt(total / spec.reference_rate) * r_max
        if wireframe:
            elements.append(
                f'<circle class="wire" cx="{_fmt(cx)}" cy="{_fmt(cy)}" '
                f'r="{_fmt(radius)}" fill="none" stroke="#000000" stroke-width="1.2"/>'
            )
        else:
            elements.append(
                f'<circle class="center" data-category="{center.category_id}" '
                f'data-total="{_fmt(total)}" data-serious="{_fmt(serious)}" '
                f'cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(radius)}" '
                f'fill="{center.fill_color}" stroke="#333333" stroke-width="1"/>'
            )
            if serious > 0:
                elements.append(
                    f'<circle class="center-serious" data-category="{center.category_id}" '
                    f'cx="{_fmt(cx)}" cy="{_fmt(cy)}" '
                    f'r="{_fmt(radius * math.sqrt(serious / total))}" '
                    f'fill="{center.serious_fill_color}" stroke="none"/>'
                )
    return elements


def _document(spec: GlyphSpec, elements: list[str]) -> str:
    size = spec.canvas_px
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">'
    ]
    parts.extend(elements)
    if spec.caption:
        caption = (
            spec.caption.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        )
        parts.append(
            f'<text x="{_fmt(size / 2.0)}" y="{size - 6}" text-anchor="middle" '
            f'font-size="13" font-family="sans-serif">{caption}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_flower_svg(spec: GlyphSpec, styles: dict[str, CategoryStyle] | None = None) -> str:
    """Render one glyph; byte-identical output for identical inputs."""
    if styles is None:
        styles = default_styles()
    _check_coverage(spec, styles)
    return _document(spec, _glyph_elements(spec, styles, wireframe=False))


def render_overlay_svg(
    selected: GlyphSpec,
    target: GlyphSpec,
    styles: dict[str, CategoryStyle] | None = None,
) -> str:
    """The target glyph with the selected glyph's outline over it, for fine
    comparison; both specs must share the reference rate."""
    if styles is None:
        styles = default_styles()
    if selected.reference_rate != target.reference_rate:
        raise GlyphError("overlay requires a shared reference_rate")
    _check_coverage(selected, styles)
    _check_coverage(target, styles)
    elements = _glyph_elements(target, styles, wireframe=False)
    elements.extend(_glyph_elements(selected, styles, wireframe=True))
    return _document(target, elements)


def table_color(rate: float) -> str:
    """Background color for tabular rates: white at 0 to full red at 5% or
    more, on a log scale between 0.05% and 5%."""
    if rate < 0:
        raise GlyphError("rate must be >= 0")
    low, high = 0.0005, 0.05
    if rate <= low:
        t = 0.0
    elif rate >= high:
        t = 1.0
    else:
        t = (math.log10(rate) - math.log10(low)) / (math.log10(high) - math.log10(low))
    channel = round(255 * (1 - t))
    return "#FF%02X%02X" % (channel, channel)
