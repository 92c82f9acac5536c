"""Command-line entry point and the plain-text file formats.

Representation files::

    genus 2
    A1 a b c d
    B1 a b c d
    ...

Domain files hold ``[meta]``, ``[vertices]``, ``[pairings]`` and ``[cones]``
sections; numbers are written with 17 significant digits so that reading a
file back reproduces the data bit for bit.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import TextIO

from . import __version__
from .char_torus import Character, character_of, orbit_sample
from .errors import BudgetExhausted, ContractError, InvalidDomain
from .geometrize import (
    ConeSurfaceData,
    Pairing,
    geometrize,
    make_domain,
    rebase_cone_point,
)
from .hyp_core import (
    TOL_DET,
    Elliptic,
    Hyperbolic,
    Identity,
    Isometry,
    Parabolic,
    PointH2,
    _from_sl2,
    classify,
    collar,
    commutator,
    commutator_trace,
    normalize,
)
from .lifts import SurfaceRepresentation, euler_number_closed
from .pentagon import search_good

EXIT_OK, EXIT_PARSE, EXIT_CONTRACT, EXIT_BUDGET = 0, 2, 3, 4
SEED_ENV = "HOLONOMY_LAB_SEED"
DATA_DIR = Path(__file__).with_name("data")


class ParseError(ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, source: str = "<input>"):
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")
        self.line = line


def _g(x: float) -> str:
    return "%.17g" % (x + 0.0)


def _floats(tokens: Sequence[str], line: int, source: str) -> list[float]:
    try:
        values = [float(t) for t in tokens]
    except ValueError:
        raise ParseError(f"expected numbers, got {' '.join(tokens)!r}", line, source) from None
    if not all(math.isfinite(v) for v in values):
        raise ParseError("non-finite number", line, source)
    return values


def _isometry(values: Sequence[float]) -> Isometry:
    """Keep entries bit for bit when they already have determinant one."""
    a, b, c, d = values
    if abs(a * d - b * c - 1) <= TOL_DET:
        return _from_sl2((a, b, c, d))
    return normalize(((a, b), (c, d)))


def _content_lines(text: str) -> Iterable[tuple[int, list[str]]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if tokens:
            yield number, tokens


# -- representation files ------------------------------------------------------------------


def generator_labels(genus: int) -> list[str]:
    return [f"{letter}{i}" for i in range(1, genus + 1) for letter in "AB"]


def parse_rep(text: str, source: str = "<input>") -> SurfaceRepresentation:
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty file", None, source)
    number, tokens = lines[0]
    if len(tokens) != 2 or tokens[0] != "genus" or not tokens[1].isdigit():
        raise ParseError("first line must be 'genus G'", number, source)
    genus = int(tokens[1])
    if genus < 2:
        raise ParseError(f"genus must be at least 2, got {genus}", number, source)
    labels = generator_labels(genus)
    found: dict[str, Isometry] = {}
    for number, tokens in lines[1:]:
        label = tokens[0].upper()
        if label not in labels:
            raise ParseError(f"unknown generator label {tokens[0]!r}", number, source)
        if label in found:
            raise ParseError(f"generator {label} given twice", number, source)
        if len(tokens) != 5:
            raise ParseError(f"expected '{label} a b c d'", number, source)
        found[label] = _isometry(_floats(tokens[1:], number, source))
    missing = [label for label in labels if label not in found]
    if missing:
        raise ParseError(f"missing generators {' '.join(missing)}", None, source)
    return SurfaceRepresentation.from_generators([found[label] for label in labels])


def format_rep(rep: SurfaceRepresentation) -> str:
    out = [f"genus {rep.genus}"]
    for label, g in zip(generator_labels(rep.genus), rep.generators):
        out.append(" ".join([label, *map(_g, g.entries)]))
    return "\n".join(out) + "\n"


def read_rep(path: str | Path) -> SurfaceRepresentation:
    return parse_rep(Path(path).read_text(), str(path))


def bundled_rep(name: str) -> SurfaceRepresentation:
    """One of the representation files shipped with the package."""
    return read_rep(DATA_DIR / f"{name}.rep")


# -- domain files -----------------------------------------------------------------------------

SECTIONS = ("meta", "vertices", "pairings", "cones")


def format_domain(data: ConeSurfaceData) -> str:
    out = ["[meta]", f"genus {data.genus}", f"chi {data.chi}", f"euler {data.euler}", "", "[vertices]"]
    out += [f"{i} {_g(v.x)} {_g(v.y)}" for i, v in enumerate(data.polygon)]
    out += ["", "[pairings]"]
    for pr in data.pairings:
        out.append(" ".join([str(pr.side_from), str(pr.side_to), *map(_g, pr.isometry.entries)]))
    out += ["", "[cones]"]
    for cone in data.cone_points:
        out.append(" ".join([*map(str, cone.vertex_orbit), _g(cone.angle)]))
    return "\n".join(out) + "\n"


def _sections(text: str, source: str) -> dict[str, list[tuple[int, list[str]]]]:
    sections: dict[str, list[tuple[int, list[str]]]] = {}
    current = None
    for number, tokens in _content_lines(text):
        head = tokens[0]
        if head.startswith("["):
            name = head.strip("[]")
            if len(tokens) != 1 or not head.endswith("]") or name not in SECTIONS:
                raise ParseError(f"unknown section header {' '.join(tokens)!r}", number, source)
            if name in sections:
                raise ParseError(f"section [{name}] repeated", number, source)
            current = sections[name] = []
        elif current is None:
            raise ParseError("content before the first section", number, source)
        else:
            current.append((number, tokens))
    missing = [name for name in SECTIONS if name not in sections]
    if missing:
        raise ParseError(f"missing sections {', '.join(missing)}", None, source)
    return sections


def _int(token: str, number: int, source: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"expected an integer, got {token!r}", number, source) from None


def parse_domain(text: str, source: str = "<input>") -> ConeSurfaceData:
    """Read a domain file and re-validate it as cone-surface data."""
    sec = _sections(text, source)
    meta = {}
    for number, tokens in sec["meta"]:
        if len(tokens) != 2 or tokens[0] not in ("genus", "chi", "euler"):
            raise ParseError("meta lines are 'genus G', 'chi X' or 'euler E'", number, source)
        meta[tokens[0]] = _int(tokens[1], number, source)
    if set(meta) != {"genus", "chi", "euler"}:
        raise ParseError("[meta] needs genus, chi and euler", None, source)

    vertices = []
    for number, tokens in sec["vertices"]:
        if len(tokens) != 3 or _int(tokens[0], number, source) != len(vertices):
            raise ParseError(f"expected '{len(vertices)} x y'", number, source)
        x, y = _floats(tokens[1:], number, source)
        if not y > 0:
            raise ParseError("vertex is not in the upper half-plane", number, source)
        vertices.append(PointH2(x, y))

    pairings = []
    for number, tokens in sec["pairings"]:
        if len(tokens) != 6:
            raise ParseError("expected 'side_from side_to a b c d'", number, source)
        i, j = (_int(t, number, source) for t in tokens[:2])
        entries = _floats(tokens[2:], number, source)
        pairings.append(Pairing(i, j, _isometry(entries)))

    cones = []
    for number, tokens in sec["cones"]:
        if len(tokens) < 2:
            raise ParseError("expected vertex indices followed by the angle", number, source)
        orbit = tuple(_int(t, number, source) for t in tokens[:-1])
        cones.append((orbit, _floats(tokens[-1:], number, source)[0]))

    data = make_domain(vertices, pairings, meta["genus"])
    stored = (meta["chi"], meta["euler"], cones)
    actual = (data.chi, data.euler, [(c.vertex_orbit, c.angle) for c in data.cone_points])
    if stored != actual:
        raise InvalidDomain(f"{source}: stored meta or cones disagree with the recomputed domain")
    return data


def read_domain(path: str | Path) -> ConeSurfaceData:
    return parse_domain(Path(path).read_text(), str(path))


# -- SVG rendering -------------------------------------------------------------------------------

SVG_SIZE = 600
SVG_RADIUS = 280


def _to_disk(z: complex) -> complex:
    return (z - 1j) / (z + 1j)


def _screen(w: complex) -> tuple[str, str]:
    c = SVG_SIZE / 2
    return "%.6f" % (c + SVG_RADIUS * w.real), "%.6f" % (c - SVG_RADIUS * w.imag)


def _arc(u: complex, v: complex) -> str:
    """SVG path segment along the disk geodesic from u to v (pen already at u)."""
    x, y = _screen(v)
    cross = u.real * v.imag - u.imag * v.real
    if abs(cross) < 1e-12:
        return f"L {x} {y}"
    # centre c of the circle through u, v orthogonal to the unit circle
    det = 2 * cross
    ru, rv = abs(u) ** 2 + 1, abs(v) ** 2 + 1
    c = complex((ru * v.imag - rv * u.imag) / det, (rv * u.real - ru * v.real) / det)
    r = "%.6f" % (SVG_RADIUS * abs(u - c))
    turn = (u - c).real * (v - c).imag - (u - c).imag * (v - c).real
    return f"A {r} {r} 0 0 {1 if turn > 0 else 0} {x} {y}"


def _polygon_path(points: Sequence[complex]) -> str:
    w = [_to_disk(z) for z in points]
    x, y = _screen(w[0])
    parts = [f"M {x} {y}"]
    parts += [_arc(w[k], w[(k + 1) % len(w)]) for k in range(len(w))]
    return " ".join(parts) + " Z"


def _tiles(data: ConeSurfaceData, layers: int) -> list[list[Isometry]]:
    """Group elements by word length in the side pairings, deduplicated."""
    gens = [pr.isometry for pr in data.pairings] + [pr.isometry.inverse() for pr in data.pairings]

    def key(g: Isometry):
        return tuple(round(x, 6) + 0.0 for x in g.entries)

    identity = Isometry(1.0, 0.0, 0.0, 1.0)
    seen = {key(identity)}
    out = [[identity]]
    for _ in range(layers):
        layer = []
        for g in out[-1]:
            for s in gens:
                t = s @ g
                if key(t) not in seen:
                    seen.add(key(t))
                    layer.append(t)
        out.append(layer)
    return out


def render_svg(data: ConeSurfaceData, layers: int = 1) -> str:
    """Developed polygon and ``layers`` rings of pairing translates in the Poincare disk."""
    z = [v.z for v in data.polygon]
    c = SVG_SIZE / 2
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- holonomy-lab {__version__} -->",
        (f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
         f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">'),
        f'<circle cx="{c}" cy="{c}" r="{SVG_RADIUS}" fill="none" stroke="black" stroke-width="1"/>',
    ]
    rings = _tiles(data, layers)
    for depth in range(len(rings) - 1, 0, -1):
        shade = "%.6f" % (0.15 + 0.5 * depth / (len(rings)))
        for g in rings[depth]:
            out.append(f'<path d="{_polygon_path([g(p) for p in z])}" fill="none" '
                       f'stroke="steelblue" stroke-opacity="{shade}" stroke-width="0.6"/>')
    out.append(f'<path d="{_polygon_path(z)}" fill="khaki" fill-opacity="0.5" '
               'stroke="black" stroke-width="1.2"/>')
    for cone in data.cone_points:
        for k in cone.vertex_orbit:
            x, y = _screen(_to_disk(z[k]))
            out.append(f'<circle cx="{x}" cy="{y}" r="3" fill="crimson"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- commands -------------------------------------------------------------------------------------


def _describe(g: Isometry) -> str:
    cls = classify(g)
    if isinstance(cls, Identity):
        return "Identity"
    if isinstance(cls, Elliptic):
        return f"Elliptic angle={_g(cls.angle)} center={_g(cls.center.x)},{_g(cls.center.y)}"
    if isinstance(cls, Parabolic):
        sense = "counterclockwise" if cls.sense > 0 else "clockwise"
        return f"Parabolic fixed={_g(cls.fixed)} sense={sense}"
    if isinstance(cls, Hyperbolic):
        return (f"Hyperbolic length={_g(cls.length)} "
                f"axis={_g(cls.axis.start)},{_g(cls.axis.end)}")
    raise AssertionError(cls)


def _handle(rep: SurfaceRepresentation, index: int) -> tuple[Isometry, Isometry]:
    if not 1 <= index <= rep.genus:
        raise ContractError(f"handle {index} is outside 1..{rep.genus}")
    return rep.handle(index)


def _emit(text: str, path: str | None, out: TextIO) -> None:
    if path is None:
        out.write(text)
    else:
        Path(path).write_text(text)


def cmd_classify(args, out: TextIO) -> int:
    rep = read_rep(args.repfile)
    out.writelines(f"{label} {_describe(g)}\n" for label, g in zip(generator_labels(rep.genus), rep.generators))
    for i in range(1, rep.genus + 1):
        a, b = rep.handle(i)
        out.write(f"[A{i},B{i}] trace={_g(commutator_trace(a, b))} {_describe(commutator(a, b))}\n")
    return EXIT_OK


def cmd_euler(args, out: TextIO) -> int:
    out.write(f"{euler_number_closed(read_rep(args.repfile))}\n")
    return EXIT_OK


def cmd_character(args, out: TextIO) -> int:
    c = character_of(*_handle(read_rep(args.repfile), args.handle))
    out.write(" ".join(map(_g, (*c.coords, c.kappa))) + "\n")
    return EXIT_OK


def cmd_pentagon_search(args, out: TextIO) -> int:
    g, h = _handle(read_rep(args.repfile), args.handle)
    if args.epsilon == "auto":
        t = commutator_trace(g, h)
        if not t > 2:
            raise ContractError(f"commutator trace {t!r} is not above 2")
        epsilon = collar(t).w
    else:
        epsilon = args.epsilon
    wit = search_good(g, h, epsilon, args.depth, args.grid, args.seed)
    if wit is None:
        out.write("absent\n")
        return EXIT_BUDGET
    out.write(f"moves {' '.join(mv.value for mv in wit.moves) or '-'}\n"
              f"point {_g(wit.point.x)} {_g(wit.point.y)}\n"
              f"delta {_g(wit.delta)}\n"
              f"epsilon {_g(wit.epsilon)}\n"
              f"side {wit.side}\n"
              f"orientation {wit.orientation}\n"
              f"corner_angle {_g(wit.corner_angle)}\n")
    return EXIT_OK


def cmd_geometrize(args, out: TextIO) -> int:
    data = geometrize(read_rep(args.repfile), seed=args.seed)
    _emit(format_domain(data), args.out, out)
    return EXIT_OK


def cmd_rebase(args, out: TextIO) -> int:
    data = read_domain(args.domainfile)
    p = data.cone_point
    moved = rebase_cone_point(data, PointH2(p.x + args.dx, p.y + args.dy))
    _emit(format_domain(moved), args.out, out)
    return EXIT_OK


def cmd_render(args, out: TextIO) -> int:
    _emit(render_svg(read_domain(args.domainfile), args.tiles), args.svg, out)
    return EXIT_OK


def cmd_orbit(args, out: TextIO) -> int:
    orbit = orbit_sample(Character.of(args.x, args.y, args.z), args.steps, args.seed)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", "x", "y", "z", "kappa"])
    for step, c in enumerate(orbit):
        writer.writerow([step, *map(_g, c.coords), _g(c.kappa)])
    _emit(buf.getvalue(), args.csv, out)
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------------------------


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text} is negative")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return value


def _epsilon(text: str):
    if text == "auto":
        return text
    value = float(text)
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError("epsilon must be 'auto' or a positive number")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holonomy-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def seeded(p):
        p.add_argument("--seed", type=int, default=None,
                       help=f"RNG seed (default: ${SEED_ENV} or 0)")

    p = sub.add_parser("classify", help="classify every generator and handle commutator")
    p.add_argument("repfile")
    p.set_defaults(run=cmd_classify)

    p = sub.add_parser("euler", help="Euler number of a closed-surface representation")
    p.add_argument("repfile")
    p.set_defaults(run=cmd_euler)

    p = sub.add_parser("character", help="trace coordinates and kappa of one handle")
    p.add_argument("repfile")
    p.add_argument("--handle", type=_positive, default=1)
    p.set_defaults(run=cmd_character)

    p = sub.add_parser("pentagon-search", help="look for an embedded pentagon near the commutator axis")
    p.add_argument("repfile")
    p.add_argument("--handle", type=_positive, default=1)
    p.add_argument("--epsilon", type=_epsilon, default="auto")
    p.add_argument("--depth", type=_non_negative, default=6)
    p.add_argument("--grid", type=_positive, default=64)
    seeded(p)
    p.set_defaults(run=cmd_pentagon_search)

    p = sub.add_parser("geometrize", help="cone-surface domain with one 4 pi cone point")
    p.add_argument("repfile")
    p.add_argument("--out")
    seeded(p)
    p.set_defaults(run=cmd_geometrize)

    p = sub.add_parser("rebase", help="move the developed cone point, keeping the holonomy")
    p.add_argument("domainfile")
    p.add_argument("--dx", type=float, default=0.0)
    p.add_argument("--dy", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(run=cmd_rebase)

    p = sub.add_parser("render", help="SVG of the domain and its pairing translates")
    p.add_argument("domainfile")
    p.add_argument("--svg")
    p.add_argument("--tiles", type=_non_negative, default=1)
    p.set_defaults(run=cmd_render)

    p = sub.add_parser("orbit", help="random walk of a character under basis changes")
    for name in "xyz":
        p.add_argument(name, type=float)
    p.add_argument("--steps", type=_non_negative, default=100)
    p.add_argument("--csv")
    seeded(p)
    p.set_defaults(run=cmd_orbit)
    return parser


def _resolve_seed(args, parser: argparse.ArgumentParser) -> None:
    if not hasattr(args, "seed") or args.seed is not None:
        return
    env = os.environ.get(SEED_ENV)
    if env is None:
        args.seed = 0
        return
    try:
        args.seed = int(env)
    except ValueError:
        parser.error(f"{SEED_ENV}={env!r} is not an integer")


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _resolve_seed(args, parser)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = sys.stdout if out is None else out
    try:
        return args.run(args, out)
    except (ParseError, OSError) as exc:
        print(f"holonomy-lab: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ContractError as exc:
        print(f"holonomy-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except BudgetExhausted as exc:
        print(f"holonomy-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
