"""
Command-line front end.

Each subcommand reads JSON inputs (--space, --cover, --function, --params),
writes a JSON report to stdout or --out and, with --plot, an SVG. Exit code
0 means every verification passed, 1 a verification failure (with a
witness in the report) and 2 an input or usage error.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import config
import json_io
from asdim import (
    brick_refiner,
    promote_refiner,
    reduce_dimension,
    search_refinement,
    search_refiner,
    singleton_refiner,
    verify_ostrand,
)
from covers import (
    ColoredCover,
    Cover,
    brick_cover_Z,
    brick_cover_Z2,
    dimension,
    is_refinement,
    lebesgue_number,
    mesh,
    multiplicity,
)
from extension import (
    RefinerOracle,
    SphereExtender,
    check_lipschitz,
    lipschitz_constant,
    mcshane_extend,
    refine_via_extension,
    simplex_extend,
    sphere_delta,
    sphere_extend,
    sphere_lebesgue_bound,
)
from metric_core import FiniteMetricSpace, VerificationError
from nerve import barycentric_lipschitz_bound, barycentric_map, nerve_of
from oscillation import (
    McShaneBoundedExtender,
    annulus_extend,
    linear_extension,
    nearest_point_extension,
    oscillation_witness,
    squares_instance,
    variation_profile,
)

logger = logging.getLogger(__name__)


@dataclass
class CommandResult:
    """Outcome of one command: exit code, JSON-ready report and written files."""

    exit_code: int
    report: Dict[str, Any]
    artifacts: List[str] = field(default_factory=list)


class _Inputs:
    """Lazy access to the files and parameters named on the command line."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.params = json_io.read_json(args.params) if args.params else {}
        self._space: Optional[FiniteMetricSpace] = None
        self._cover = None

    def param(self, name: str, default: Any = None, required: bool = False) -> Any:
        flag = getattr(self.args, name.replace("-", "_").replace(".", "_"), None)
        if flag is not None:
            return flag
        value = json_io.extract_param(self.params, name, None)
        if value is None:
            if required:
                raise json_io.InputFormatError(
                    f"Missing parameter '{name}' (flag or --params entry)"
                )
            return default
        return value

    def number(self, name: str, default: Any = None, required: bool = False) -> Optional[float]:
        value = self.param(name, default, required)
        return None if value is None else json_io.decode_number(value)

    @property
    def space(self) -> Optional[FiniteMetricSpace]:
        if self._space is None and self.args.space:
            self._space = json_io.load_space(self.args.space)
        return self._space

    def cover(self):
        if self._cover is None:
            if not self.args.cover:
                raise json_io.InputFormatError("This command needs --cover")
            self._cover = json_io.load_cover(self.args.cover, self.space)
            if self._space is None:
                flat = self._cover.flattened if isinstance(self._cover, ColoredCover) else self._cover
                self._space = flat.space
        return self._cover

    def plain_cover(self) -> Cover:
        cover = self.cover()
        return cover.flattened if isinstance(cover, ColoredCover) else cover

    def colored_cover(self) -> ColoredCover:
        cover = self.cover()
        if not isinstance(cover, ColoredCover):
            raise json_io.InputFormatError("This command needs a cover with 'families'")
        return cover

    def function(self):
        if not self.args.function:
            raise json_io.InputFormatError("This command needs --function")
        return json_io.load_function(self.args.function, self.space)

    def require_space(self) -> FiniteMetricSpace:
        if self.space is None:
            raise json_io.InputFormatError("This command needs --space")
        return self.space

    def point(self, name: str) -> Any:
        value = self.param(name)
        if isinstance(value, str):
            try:
                value = json.loads(value)
            except json.JSONDecodeError:
                pass
        return None if value is None else json_io.decode_point(value)


# -- refiners by name ---------------------------------------------------------


def build_refiner(
    name: str,
    inputs: _Inputs,
    space: FiniteMetricSpace,
    s: float,
    t: float,
    dimension_: int,
    members: Optional[int],
) -> RefinerOracle:
    """Refiner addressed by name: search, singleton, brick or promoted:<name>."""
    if name.startswith("promoted:"):
        inner = build_refiner(
            name[len("promoted:"):],
            inputs,
            space,
            s,
            t / 4,
            dimension_ - 1,
            None if members is None else members - 1,
        )
        return promote_refiner(space, inner)
    if name == "search":
        return search_refiner(
            s,
            t,
            dimension_,
            members,
            budget=inputs.param("budget", config.DEFAULT_SEARCH_BUDGET),
            seed=inputs.param("seed", config.DEFAULT_SEED),
        )
    if name == "singleton":
        return singleton_refiner(space, inputs.number("s"))
    if name == "brick":
        path = inputs.param("refiner_cover", required=True)
        colored = json_io.load_cover(path, space)
        if not isinstance(colored, ColoredCover):
            raise json_io.InputFormatError("The brick refiner needs a colored cover")
        return brick_refiner(colored)
    raise json_io.InputFormatError(f"Unknown refiner {name!r}")


# -- commands -----------------------------------------------------------------


def cmd_leb(inputs: _Inputs) -> Tuple[Dict[str, Any], bool]:
    report = lebesgue_number(inputs.plain_cover())
    return {"value": report.value, "witness": report.critical_point}, True


def cmd_mult(inputs: _Inputs):
    cover = inputs.plain_cover()
    return {"value": multiplicity(cover), "dimension": dimension(cover)}, True


def cmd_mesh(inputs: _Inputs):
    return {"value": mesh(inputs.plain_cover())}, True


def cmd_nerve(inputs: _Inputs):
    nerve = nerve_of(inputs.plain_cover())
    return {
        "vertices": sorted(nerve.vertices),
        "maximal_simplices": [sorted(s) for s in nerve.maximal_simplices],
        "dimension": nerve.dimension,
    }, True


def cmd_barymap(inputs: _Inputs):
    cover = inputs.plain_cover()
    phi = barycentric_map(cover)
    measured = lipschitz_constant(cover.space, phi)
    bound = barycentric_lipschitz_bound(cover)
    return {
        "function": phi,
        "lipschitz": measured,
        "bound": bound,
        "within_bound": measured <= bound + config.TOLERANCE,
    }, measured <= bound + config.TOLERANCE


def cmd_mcshane(inputs: _Inputs):
    space = inputs.require_space()
    partial = inputs.function()
    lam = inputs.number("lam")
    if lam is None:
        lam = lipschitz_constant(partial.space, partial)
    clamp = inputs.param("clamp")
    g = mcshane_extend(space, partial, lam, tuple(clamp) if clamp else None)
    return {"function": g, "lam": lam}, True


def cmd_simplex_extend(inputs: _Inputs):
    space = inputs.require_space()
    partial = inputs.function()
    lam = inputs.number("lam", required=True)
    g = simplex_extend(space, partial, lam)
    return {"function": g, "lam": lam, "lipschitz": lipschitz_constant(space, g)}, True


def cmd_sphere_extend(inputs: _Inputs):
    space = inputs.require_space()
    partial = inputs.function()
    delta = inputs.number("delta", required=True)
    m = partial.width - 2
    refiner = build_refiner(
        inputs.param("refiner", "search"),
        inputs,
        space,
        inputs.number("s", 1.0),
        sphere_lebesgue_bound(m, delta),
        m,
        m + 2,
    )
    h, cert = sphere_extend(space, partial, delta, refiner)
    report = {
        "status": "identity extension" if cert.identity else "extended",
        "certificate": cert.to_dict(),
        "stages": cert.stages().to_dicts(),
        "function": h,
    }
    return report, cert.passed


def cmd_refine_via_extension(inputs: _Inputs):
    cover = inputs.plain_cover()
    space = cover.space
    m = len(cover) - 2
    epsilon = inputs.number("epsilon", required=True)
    delta = inputs.number("delta", sphere_delta(epsilon, m))
    refiner = build_refiner(
        inputs.param("refiner", "search"),
        inputs,
        space,
        inputs.number("s", 1.0),
        sphere_lebesgue_bound(m, delta),
        m,
        m + 2,
    )
    refined = refine_via_extension(space, cover, SphereExtender(delta, refiner), epsilon)
    return {
        "cover": refined,
        "multiplicity": multiplicity(refined),
        "lebesgue": lebesgue_number(refined).value,
        "delta": delta,
    }, True


def cmd_promote(inputs: _Inputs):
    cover = inputs.plain_cover()
    space = cover.space
    n = len(cover) - 3
    refiner = build_refiner(
        inputs.param("refiner", "search"),
        inputs,
        space,
        inputs.number("s", 1.0),
        inputs.number("t", required=True),
        n,
        n + 2,
    )
    promoted = promote_refiner(space, refiner)
    refined = promoted(cover)
    return {
        "refiner": promoted.name,
        "cover": refined,
        "refines": bool(is_refinement(refined, cover)),
        "dimension": dimension(refined),
        "lebesgue": lebesgue_number(refined).value,
        "q": promoted.s,
    }, True


def cmd_reduce_dim(inputs: _Inputs):
    colored = inputs.colored_cover()
    space = colored.space
    n = len(colored.families) - 2
    refiner = build_refiner(
        inputs.param("refiner", "search"),
        inputs,
        space,
        inputs.number("s", colored.r / 2),
        colored.r,
        n,
        n + 2,
    )
    reduced = reduce_dimension(space, colored, refiner)
    return {
        "cover": reduced,
        "dimension": dimension(reduced),
        "mesh": mesh(reduced),
        "lebesgue": lebesgue_number(reduced).value,
    }, True


def cmd_ostrand_verify(inputs: _Inputs):
    colored = inputs.colored_cover()
    r = inputs.number("r", colored.r)
    n = int(inputs.param("n", len(colored.families) - 1))
    report = verify_ostrand(colored, r, n)
    return {
        "verdict": report.verdict,
        "r": report.r,
        "families_checked": report.families_checked,
        "disjoint": [bool(d) for d in report.disjointness],
        "disjointness_witnesses": [d.witness_points for d in report.disjointness],
        "lebesgue": report.lebesgue,
        "lebesgue_witness": report.lebesgue_point,
        "mesh": report.mesh,
    }, report.verdict


def cmd_brick(inputs: _Inputs):
    L = int(inputs.param("L", required=True))
    window = inputs.param("window", required=True)
    lo, hi = (int(w) for w in window)
    if int(inputs.param("dim", 1)) == 1:
        colored = brick_cover_Z((lo, hi), L)
    else:
        colored = brick_cover_Z2((lo, hi), L)
    return json_io.cover_to_dict(colored, include_space=True), True


def cmd_search_refine(inputs: _Inputs):
    cover = inputs.plain_cover()
    found = search_refinement(
        cover.space,
        cover,
        inputs.number("target_leb", required=True),
        int(inputs.param("target_mult", required=True)),
        inputs.param("budget"),
        inputs.param("seed"),
    )
    if found is None:
        return {"found": False}, False
    return {
        "found": True,
        "cover": found,
        "multiplicity": multiplicity(found),
        "lebesgue": lebesgue_number(found).value,
    }, True


def _profiles(inputs: _Inputs):
    space = inputs.require_space()
    f = inputs.function()
    radii = inputs.param("radius", required=True)
    radii = radii if isinstance(radii, list) else [radii]
    Ns = inputs.param("Ns", required=True)
    basepoint = inputs.point("basepoint")
    return [variation_profile(space, f, float(R), Ns, basepoint) for R in radii]


def cmd_so_profile(inputs: _Inputs):
    profiles = _profiles(inputs)
    epsilon = inputs.number("epsilon")
    report: Dict[str, Any] = {
        "profiles": [{"R": p.R, "entries": [list(e) for e in p.entries]} for p in profiles]
    }
    if epsilon is not None:
        report["certified"] = [
            {"R": p.R, "beyond": [n for n, v in p.entries if v < epsilon]} for p in profiles
        ]
    return report, True


def cmd_counterexample(inputs: _Inputs):
    instance = squares_instance(int(inputs.param("nmax", required=True)))
    kind = inputs.param("extender", "linear")
    extenders: Dict[str, Callable] = {
        "linear": linear_extension,
        "nearest": nearest_point_extension,
    }
    if kind not in extenders:
        raise json_io.InputFormatError(f"Unknown extender {kind!r}")
    g = extenders[kind](instance.space, instance.inclusion)
    witness = oscillation_witness(
        instance.space,
        g,
        inputs.number("epsilon", 1.0),
        inputs.number("radius", 1.0),
        inputs.number("beyond", required=True),
    )
    report: Dict[str, Any] = {"extender": kind, "witness": witness}
    if witness is not None:
        report["image_distance"] = float(abs(g.scalar(witness[0]) - g.scalar(witness[1])))
    return report, witness is not None


def cmd_check_lip(inputs: _Inputs):
    inputs.require_space()
    f = inputs.function()
    report = check_lipschitz(
        f.space,
        f,
        inputs.number("lam", required=True),
        inputs.number("c", 0.0),
    )
    return {
        "satisfied": report.satisfied,
        "worst_pair": report.worst_pair,
        "worst_ratio": report.worst_ratio,
    }, report.satisfied


def cmd_annulus_extend(inputs: _Inputs):
    space = inputs.require_space()
    f = inputs.function()
    pasted = annulus_extend(
        space,
        f,
        R=inputs.number("radius", required=True),
        mu=inputs.number("mu", required=True),
        S=inputs.number("S", required=True),
        epsilon=inputs.number("epsilon", required=True),
        M=inputs.number("M", required=True),
        bounded_extender=McShaneBoundedExtender(inputs.number("lam_hint", 0.0)),
        lam=inputs.number("lam"),
        basepoint=inputs.point("basepoint"),
    )
    return {"function": pasted}, True


_NUMBER = {"type": str, "default": None}

COMMANDS: Dict[str, Tuple[Callable, str, Sequence[str]]] = {
    "leb": (cmd_leb, "Lebesgue number of a cover", ()),
    "mult": (cmd_mult, "multiplicity of a cover", ()),
    "mesh": (cmd_mesh, "mesh of a cover", ()),
    "nerve": (cmd_nerve, "nerve of a cover", ()),
    "barymap": (cmd_barymap, "barycentric map of a cover", ()),
    "mcshane": (cmd_mcshane, "McShane extension of scalar data", ("lam",)),
    "simplex-extend": (cmd_simplex_extend, "extension of simplex-valued data", ("lam",)),
    "sphere-extend": (
        cmd_sphere_extend,
        "extension of boundary-valued data",
        ("delta", "s", "refiner", "budget", "seed", "refiner-cover"),
    ),
    "refine-via-extension": (
        cmd_refine_via_extension,
        "refine a cover through sphere extension",
        ("epsilon", "delta", "s", "refiner", "budget", "seed", "refiner-cover"),
    ),
    "promote": (
        cmd_promote,
        "promote a refiner and apply it to a cover",
        ("s", "t", "refiner", "budget", "seed", "refiner-cover"),
    ),
    "reduce-dim": (
        cmd_reduce_dim,
        "dimension reduction of a colored cover",
        ("s", "refiner", "budget", "seed", "refiner-cover"),
    ),
    "ostrand-verify": (cmd_ostrand_verify, "verify a colored cover at scale r", ("r", "n")),
    "brick": (cmd_brick, "brick cover of a window of Z or Z^2", ("L", "window", "dim")),
    "search-refine": (
        cmd_search_refine,
        "search for a refinement",
        ("target-leb", "target-mult", "budget", "seed"),
    ),
    "so-profile": (
        cmd_so_profile,
        "variation profile of a function",
        ("radius", "Ns", "basepoint", "epsilon"),
    ),
    "counterexample": (
        cmd_counterexample,
        "oscillation witness for extensions of the squares inclusion",
        ("nmax", "extender", "epsilon", "radius", "beyond"),
    ),
    "check-lip": (cmd_check_lip, "exhaustive (lam, c)-Lipschitz check", ("lam", "c")),
    "annulus-extend": (
        cmd_annulus_extend,
        "annulus pasting extension of [0, 1]-valued data",
        ("radius", "mu", "S", "epsilon", "M", "lam", "lam-hint", "basepoint"),
    ),
}

_INT_OPTIONS = {"budget", "seed", "nmax", "n", "L", "dim", "target-mult"}
_LIST_OPTIONS = {"window": int, "Ns": float}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", help="Space JSON file")
    common.add_argument("--cover", help="Cover JSON file")
    common.add_argument("--function", help="Function JSON file")
    common.add_argument("--params", help="Parameter JSON file (dot paths)")
    common.add_argument("--out", help="Write the report here instead of stdout")
    common.add_argument("--plot", help="Write an SVG plot here")
    common.add_argument("--verbose", action="store_true", help="Log at DEBUG level")

    parser = argparse.ArgumentParser(
        prog="coarse-ext", description="Finite-scale coarse geometry toolkit"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, (handler, help_text, options) in COMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text, parents=[common])
        for option in options:
            dest = option.replace("-", "_")
            if option in _LIST_OPTIONS:
                sub.add_argument(f"--{option}", dest=dest, nargs="+", type=_LIST_OPTIONS[option])
            elif option in _INT_OPTIONS:
                sub.add_argument(f"--{option}", dest=dest, type=int)
            elif option in ("refiner", "extender", "basepoint", "refiner-cover"):
                sub.add_argument(f"--{option}", dest=dest)
            else:
                sub.add_argument(f"--{option}", dest=dest, **_NUMBER)
        sub.set_defaults(handler=handler)
    return parser


def _plot(args: argparse.Namespace, inputs: _Inputs, report: Dict[str, Any]) -> Optional[str]:
    import plots

    if args.command == "so-profile":
        return plots.plot_profiles(_profiles(inputs), args.plot)
    if args.command == "brick":
        return plots.plot_cover(json_io.cover_from_dict(report), args.plot)
    cover = report.get("cover")
    if isinstance(cover, Cover):
        return plots.plot_cover(cover, args.plot)
    if args.cover:
        return plots.plot_cover(inputs.cover(), args.plot)
    logger.warning(f"No plot available for {args.command}")
    return None


def _emit(report: Dict[str, Any], args: argparse.Namespace, artifacts: List[str]):
    text = json_io.dumps_report(report)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
        artifacts.append(args.out)
    else:
        print(text)


def run(argv: Optional[Sequence[str]] = None) -> CommandResult:
    """
    Parse a command line, run the command and emit its report.

    Returns:
        CommandResult with exit code 0 (all checks passed), 1 (verification
        failure) or 2 (input or usage error)
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        code = e.code if isinstance(e.code, int) else 2
        return CommandResult(code, {"error": "usage"} if code else {})

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else config.LOG_LEVEL,
        format=config.LOG_FORMAT,
        stream=sys.stderr,
    )
    artifacts: List[str] = []
    try:
        inputs = _Inputs(args)
        report, passed = args.handler(inputs)
    except VerificationError as e:
        logger.error(f"{args.command}: verification failed: {e}")
        report = {"verdict": False, "error": str(e), "witness": e.witness}
        _emit(report, args, artifacts)
        return CommandResult(1, report, artifacts)
    except (ValueError, OSError) as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return CommandResult(2, {"error": str(e)}, artifacts)

    if args.plot:
        try:
            written = _plot(args, inputs, report)
            if written:
                artifacts.append(written)
        except ValueError as e:
            logger.warning(f"Plot skipped: {e}")
    _emit(report, args, artifacts)
    return CommandResult(0 if passed else 1, report, artifacts)


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(argv).exit_code


if __name__ == "__main__":
    sys.exit(main())
