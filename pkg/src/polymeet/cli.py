"""Command-line interface: fixtures, symmetry reports, augmentation dumps,
simulation runs, the bit codec, and the adversary service."""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click

from polymeet import canon, fixtures
from polymeet.augmentation import build_branch_partition, stage_schedule
from polymeet.encoding import BitString, pack_reals, unpack_reals
from polymeet.geometry import PolygonWithHoles, PolygonValidationError, scalar_float
from polymeet.scalars import scalar_to_json
from polymeet.simulator import build_world, builtin_policies, run
from polymeet.symmetry import select_pivot_general, symmetricity


def _load_polygon(path: str) -> PolygonWithHoles:
    with open(path) as fh:
        try:
            return PolygonWithHoles.from_json(fh.read())
        except PolygonValidationError as exc:
            raise click.ClickException(str(exc))


@click.group()
def main():
    """Meeting-problem simulator and verification tools."""


@main.command()
@click.argument("polygon", type=click.Path(exists=True))
def symmetry(polygon):
    """Print symmetricity, axes, and canonical vertex classes as JSON."""
    P = _load_polygon(polygon)
    prof = symmetricity(P)
    out = {
        "sigma": prof.sigma,
        "axes": [
            [[scalar_to_json(a.x), scalar_to_json(a.y)],
             [scalar_to_json(b.x), scalar_to_json(b.y)]]
            for a, b in prof.axes
        ],
        "axis_classes": prof.axis_classes,
        "rotation_classes": prof.rotation_classes,
        "similarity_classes": prof.similarity_classes,
    }
    click.echo(json.dumps(out, indent=2))


@main.command()
@click.argument("polygon", type=click.Path(exists=True))
@click.option("--pivot-seed", default=0, show_default=True)
@click.option("--improved", is_flag=True, help="branch partition of the improved algorithm")
@click.option("--svg", type=click.Path(), default=None, help="write a tour debug rendering")
def augment(polygon, pivot_seed, improved, svg):
    """Emit cuts, tours and (with --improved) the branch partition."""
    P = _load_polygon(polygon)
    if improved:
        part = build_branch_partition(P)
        sch = stage_schedule(part)
        pivot = part.pivot_class[pivot_seed % len(part.pivot_class)]
        out = {
            "pivot": [scalar_to_json(pivot.x), scalar_to_json(pivot.y)],
            "branches": part.branch_count,
            "sub_branches": part.sub_branch_count,
            "m": part.m,
            "t": part.t,
            "schedule_length": sch.length,
            "cuts": [
                [[scalar_to_json(a.x), scalar_to_json(a.y)],
                 [scalar_to_json(b.x), scalar_to_json(b.y)]]
                for a, b in part.cuts
            ],
            "j_tours": {
                j: [[scalar_to_json(p.x), scalar_to_json(p.y)]
                    for p in part.j_tour(j, "CCW", pivot)]
                for j in range(part.m + 1)
            },
        }
        tour_pts = part.j_tour(part.m, "CCW", pivot)
    else:
        plan = canon.alg1_plan(P, pivot_seed)
        out = {
            "pivot": [scalar_to_json(plan.pivot.location.x), scalar_to_json(plan.pivot.location.y)],
            "pivot_kind": plan.pivot.kind,
            "tours": {
                d: [[scalar_to_json(p.x), scalar_to_json(p.y)] for p in t]
                for d, t in plan.tours.items()
            },
        }
        tour_pts = plan.tours["CCW"]
    click.echo(json.dumps(out, indent=2))
    if svg:
        _write_svg(svg, P, tour_pts)


def _write_svg(path, P, tour):
    rings = P.float_rings()
    xs = [x for ring in rings for x, _ in ring]
    ys = [y for ring in rings for _, y in ring]
    pad = (max(xs) - min(xs)) * 0.05 + 1
    x0, y0, x1, y1 = min(xs) - pad, min(ys) - pad, max(xs) + pad, max(ys) + pad
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0} {y0} {x1 - x0} {y1 - y0}">',
        f'<g transform="translate(0,{y0 + y1}) scale(1,-1)">',
    ]
    for i, ring in enumerate(rings):
        pts = " ".join(f"{x},{y}" for x, y in ring)
        fill = "#dddddd" if i == 0 else "#ffffff"
        parts.append(f'<polygon points="{pts}" fill="{fill}" stroke="black" stroke-width="0.05"/>')
    tpts = " ".join(f"{scalar_float(p.x)},{scalar_float(p.y)}" for p in tour)
    parts.append(
        f'<polyline points="{tpts}" fill="none" stroke="crimson" stroke-width="0.08" stroke-dasharray="0.3 0.15"/>'
    )
    parts.append("</g></svg>")
    with open(path, "w") as fh:
        fh.write("".join(parts))
    click.echo(f"wrote {path}", err=True)


@main.command()
@click.argument("kind")
@click.option("--sigma", default=5, show_default=True)
@click.option("-n", default=5, show_default=True)
@click.option("-o", "out", type=click.Path(), default="-")
def fixture(kind, sigma, n, out):
    """Generate a fixture polygon as JSON (kind: star, regular, or a gallery name)."""
    try:
        P = fixtures.build(kind, sigma=sigma, n=n)
    except KeyError:
        names = ", ".join(s.name for s in fixtures.GALLERY)
        raise click.ClickException(f"unknown fixture {kind!r}; gallery: star, regular, {names}")
    text = P.to_json()
    if out == "-":
        click.echo(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


@main.command()
def gallery():
    """List the fixture gallery with expected properties."""
    rows = [
        {
            "name": s.name,
            "sigma": s.sigma,
            "axes": s.axes,
            "holes": s.holes,
            "centroid_in_hole": s.centroid_in_hole,
        }
        for s in fixtures.GALLERY
    ]
    click.echo(json.dumps(rows, indent=2))


@main.command(name="run")
@click.option("--polygon", type=click.Path(exists=True), default=None)
@click.option("--fixture", "fixture_name", default=None)
@click.option("--alg", type=click.Choice(["1", "2"]), default="1", show_default=True)
@click.option("--searchers", default=2, show_default=True)
@click.option("--policy", default="seeded_random", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--budget", default=10000, show_default=True)
@click.option("--frames", default="identity", show_default=True)
@click.option("--trace", "trace_out", type=click.Path(), default=None)
def run_cmd(polygon, fixture_name, alg, searchers, policy, seed, budget, frames, trace_out):
    """Run a simulation to Met or budget exhaustion."""
    if polygon:
        P = _load_polygon(polygon)
    elif fixture_name:
        P = fixtures.build(fixture_name)
    else:
        raise click.ClickException("need --polygon or --fixture")
    registry = builtin_policies()
    if policy not in registry:
        raise click.ClickException(f"unknown policy; choose from {sorted(registry)}")
    pol = registry[policy](seed=seed)
    world = build_world(P, int(alg), searchers, policy_seed=seed, frames=frames)
    trace = run(world, pol, budget)
    if trace_out:
        with open(trace_out, "w") as fh:
            fh.write(trace.to_jsonl())
    if trace.outcome is None:
        click.echo(f"BudgetExhausted after {budget} directives")
    else:
        click.echo(f"Met: searchers {trace.outcome[1]} at t={trace.outcome[2]}")


@main.group()
def codec():
    """Positional-encoding codec over hex bit strings."""


@codec.command()
@click.argument("values", nargs=-1)
@click.option("--scale", default=0, show_default=True)
def pack(values, scale):
    """Pack dyadic rationals into a hex bit string."""
    vals = [Fraction(v) for v in values]
    bits = pack_reals(vals, scale)
    click.echo(bits.to_hex())


@codec.command()
@click.argument("hexstring")
def unpack(hexstring):
    """Unpack a hex bit string into its values and scale."""
    bits = BitString.from_hex(hexstring)
    vals, lam = unpack_reals(bits)
    click.echo(json.dumps({"scale": lam, "values": [str(v) for v in vals]}))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8008, show_default=True)
def serve(host, port):
    """Start the adversary-console session service."""
    import uvicorn

    from polymeet.service import app

    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
