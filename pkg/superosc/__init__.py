import json
import logging
import sys

import click
import mpmath

from config import Config
from constants import (
    ALL_SCHEMES,
    DEFAULT_CHECK_POINTS_PER_AXIS,
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_OK,
    MODE_SUPERSHIFT,
    OPERATOR_U,
    OPERATOR_V,
)
from superosc.errors import exit_code_for
from superosc.export import format_value

logger = logging.getLogger(__name__)


def _diagnostic(error, code):
    message = " ".join(str(error).split()).replace('"', '\\"')
    return f'error exit={code} kind={type(error).__name__} message="{message}"'


class SuperoscGroup(click.Group):
    """Turns library failures into exit codes with a one-line diagnostic on stderr."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (click.ClickException, click.exceptions.Exit, click.Abort):
            raise
        except Exception as e:
            code = exit_code_for(e)
            logger.error(f"{type(e).__name__}: {e}")
            click.echo(_diagnostic(e, code), err=True)
            ctx.exit(code)


def _echo_json(payload):
    click.echo(json.dumps(format_value(payload), indent=2))


def create_cli(config_class=Config):
    from config import config_hash, dump_problem_config, load_problem_config
    from models import ConvergenceReport, GridSpec, PrecisionPolicy
    from superosc.coefficients import (
        coefficient_magnitude,
        solve_coefficients,
        verify_interpolation,
    )
    from superosc.convergence import absolute_error, default_grid, dual_route_check, sweep
    from superosc.errors import ConfigError, ProblemFileError
    from superosc.export import emit_plot_data, package_versions
    from superosc.growth_space import bnorm_estimate
    from superosc.nodes import generate_nodes
    from superosc.numbers import to_mp
    from superosc.operator_engine import (
        continuity_majorant,
        continuity_probe,
        operator_route_Fn,
    )
    from superosc.precision import with_escalation
    from superosc.problems import (
        build_problem,
        grid_for,
        parse_n_list,
        parse_point,
        policy_for,
        problem_factory,
    )
    from superosc.sequences import (
        admissible_halfwidth,
        evaluate_sequence,
        evaluate_target,
        superoscillation_frequencies,
    )
    from superosc.taylor_input import load_growth_function

    settings = config_class if isinstance(config_class, Config) else config_class()
    logging.basicConfig(
        level=settings.log_level.upper(),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    def read_config(path):
        try:
            return load_problem_config(path)
        except OSError as e:
            raise ProblemFileError(f"Could not read problem file {path}: {e}") from e

    @click.group(cls=SuperoscGroup)
    def cli():
        """Superoscillation and supershift numerics."""

    @cli.command("coeffs")
    @click.option("--scheme", type=click.Choice(ALL_SCHEMES), default="equispaced")
    @click.option("--n", "n", type=int, default=None)
    @click.option("--a", "a", required=True)
    @click.option("--points", "custom_points", default=None, help="Comma separated custom nodes.")
    @click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
    @click.option("--bits", type=int, default=None)
    def coeffs_command(scheme, n, a, custom_points, fmt, bits):
        """Coefficients Z_j(n, a) and the interpolation residuals."""
        points = parse_point(custom_points) if custom_points else None
        order = n if points is None else len(points) - 1
        policy = PrecisionPolicy.for_order(order or 1, bits=bits or settings.bits)
        with mpmath.workprec(policy.bits):
            nodes = generate_nodes(scheme, n, custom_points=points, policy=policy)
            coeffs = solve_coefficients(nodes, parse_point(a)[0])
            residuals = verify_interpolation(coeffs)
            largest_z, total_z = coefficient_magnitude(coeffs)
            if fmt == "csv":
                click.echo("j,Z_j,residual")
                for j, (z, r) in enumerate(zip(coeffs.values, residuals)):
                    click.echo(f"{j},{format_value(z)},{format_value(r)}")
                return
            _echo_json(
                {
                    "scheme": scheme,
                    "n": nodes.n,
                    "a": coeffs.a,
                    "exact": coeffs.exactness_flag,
                    "Z": list(coeffs.values),
                    "residuals": residuals,
                    "max_abs_Z": largest_z,
                    "sum_abs_Z": total_z,
                }
            )

    @cli.command("certify")
    @click.option("--input", "input_path", required=True)
    @click.option("--B", "B", required=True)
    @click.option("--bits", type=int, default=None)
    def certify_command(input_path, B, bits):
        """Growth certificate (C, b) and the B-norm estimate of a function."""
        with mpmath.workprec(bits or settings.bits or PrecisionPolicy().bits):
            f = load_growth_function(input_path, b_min=settings.b_min)
            C, b = f.certificate
            estimate = bnorm_estimate(f, B, margin=settings.norm_margin)
            _echo_json(
                {
                    "label": f.label,
                    "C": C,
                    "b": b,
                    "bnorm_lower": estimate.lower,
                    "bnorm_upper": estimate.upper,
                }
            )

    @cli.command("eval")
    @click.option("--config", "config_path", required=True)
    @click.option("--x", "x", required=True)
    @click.option("--n", "n", type=int, default=None)
    @click.option("--bits", type=int, default=None)
    def eval_command(config_path, x, n, bits):
        """F_n(x), its limit and the error between them."""
        cfg = read_config(config_path)
        n = n or cfg.nodes.n
        point = parse_point(x)
        policy = policy_for(cfg, n, settings, bits)

        def computation():
            problem = build_problem(cfg, n, settings)
            value = evaluate_sequence(problem, point)
            target = evaluate_target(problem, point)
            return {
                "value": value.value,
                "target": target.value,
                "tail_bound": value.tail_bound,
                "target_tail_bound": target.tail_bound,
            }

        result = with_escalation(computation, policy, label="eval")
        with mpmath.workprec(result.bits):
            payload = dict(result.value)
            payload["error"] = absolute_error(payload["value"], payload["target"])
            payload.update(n=n, x=point, bits=result.bits, precision_error=result.error)
            _echo_json(payload)

    @cli.command("sweep")
    @click.option("--config", "config_path", required=True)
    @click.option("--n", "n_spec", default=None, help="start:step:stop or a comma separated list.")
    @click.option("--grid", "grid_choice", type=click.Choice(["config", "default"]), default="config")
    @click.option("--points", "points_per_axis", type=int, default=None)
    @click.option("--dual-route", is_flag=True, default=False)
    @click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
    @click.option("--out", default=None)
    @click.option("--bits", type=int, default=None)
    def sweep_command(config_path, n_spec, grid_choice, points_per_axis, dual_route, fmt, out, bits):
        """Sup-norm convergence table over a grid for a list of n."""
        cfg = read_config(config_path)
        n_list = parse_n_list(n_spec) if n_spec else list(cfg.n_list)
        if not n_list:
            click.echo(emit_plot_data(ConvergenceReport(), fmt, out), nl=False)
            return
        with mpmath.workprec(policy_for(cfg, n_list[0], settings, bits).bits):
            first = build_problem(cfg, n_list[0], settings)
            if grid_choice == "default":
                grid = default_grid(first, points_per_axis or cfg.grid.points_per_axis)
            else:
                grid = grid_for(cfg, first, points_per_axis)
        check = GridSpec(grid.box, DEFAULT_CHECK_POINTS_PER_AXIS) if dual_route else None
        click.echo(f"Sweeping n = {n_list} over {len(grid.points())} grid points...", err=True)
        report = sweep(
            problem_factory(cfg, settings),
            n_list,
            grid,
            policy=lambda n: policy_for(cfg, n, settings, bits),
            dual_route_grid=check,
            metadata={
                "config_hash": config_hash(cfg),
                "versions": package_versions(),
                "mode": cfg.mode,
                "grid_box": [list(interval) for interval in grid.box],
            },
        )
        text = emit_plot_data(report, fmt, out)
        if out is None:
            click.echo(text, nl=False)
        else:
            click.echo(f"Wrote {len(report.n_values)} rows to {out}")

    @cli.command("operator")
    @click.option("--kind", type=click.Choice([OPERATOR_U, OPERATOR_V]), default=None)
    @click.option("--config", "config_path", required=True)
    @click.option("--x", "x", required=True)
    @click.option("--n", "n", type=int, default=None)
    @click.option("--N", "N", default="auto")
    @click.option("--probe", is_flag=True, default=False)
    @click.option("--report", "report_format", type=click.Choice(["json"]), default="json")
    @click.option("--bits", type=int, default=None)
    def operator_command(kind, config_path, x, n, N, probe, report_format, bits):
        """F_n(x) through the operator route, checked against the direct sum."""
        cfg = read_config(config_path)
        expected = OPERATOR_V if cfg.mode == MODE_SUPERSHIFT else OPERATOR_U
        if kind is not None and kind != expected:
            raise ConfigError(f"{cfg.mode} problems use operator {expected}, not {kind}")
        if N != "auto":
            try:
                N = int(N)
            except ValueError as e:
                raise ConfigError(f"--N must be 'auto' or an integer, got {N!r}") from e
        else:
            N = None
        n = n or cfg.nodes.n
        point = parse_point(x)
        policy = policy_for(cfg, n, settings, bits)
        with mpmath.workprec(policy.bits):
            problem = build_problem(cfg, n, settings)
            routed = operator_route_Fn(problem, point, N)
            direct = evaluate_sequence(problem, point)
            payload = {
                "kind": expected,
                "n": n,
                "x": point,
                "bits": policy.bits,
                "value": routed.value,
                "tail_bound": routed.tail_bound,
                "direct_value": direct.value,
                "dual_route_discrepancy": abs(
                    to_mp(routed.value) - to_mp(direct.value)
                ),
            }
            if probe:
                result = continuity_probe(
                    expected, point, problem.G, problem.B, n_max=problem.symbol_n_max
                )
                payload["probe"] = {"max_ratio": result.max_ratio, "ratios": result.ratios}
                payload["majorant"] = continuity_majorant(expected, point, problem.G, problem.B)
            _echo_json(payload)

    @cli.command("check")
    @click.option("--config", "config_path", required=True)
    @click.option("--n", "n", type=int, default=None)
    @click.option("--points", "points_per_axis", type=int, default=DEFAULT_CHECK_POINTS_PER_AXIS)
    @click.option("--bits", type=int, default=None)
    @click.pass_context
    def check_command(ctx, config_path, n, points_per_axis, bits):
        """Dual-route check: direct sums against the operator route on a grid."""
        cfg = read_config(config_path)
        n = n or cfg.nodes.n
        policy = policy_for(cfg, n, settings, bits)
        with mpmath.workprec(policy.bits):
            problem = build_problem(cfg, n, settings)
            grid = grid_for(cfg, problem, points_per_axis)
            result = dual_route_check(problem, grid)
            _echo_json(
                {
                    "n": n,
                    "bits": policy.bits,
                    "points": len(grid.points()),
                    "discrepancy": result.discrepancy,
                    "tail_bound": result.tail_bound,
                    "worst_point": result.worst_point,
                    "ok": result.within_bounds,
                }
            )
        if not result.within_bounds:
            logger.error(f"check: discrepancy exceeds the tail bounds for n={n}")
            ctx.exit(EXIT_NUMERIC)

    @cli.command("validate")
    @click.option("--config", "config_path", required=True)
    @click.option("--dump", is_flag=True, default=False, help="Print the canonical form.")
    def validate_command(config_path, dump):
        """Validates a problem file and reports the derived quantities."""
        cfg = read_config(config_path)
        if dump:
            click.echo(dump_problem_config(cfg), nl=False)
            return
        n = cfg.nodes.n
        with mpmath.workprec(policy_for(cfg, n, settings).bits):
            problem = build_problem(cfg, n, settings)
            payload = {
                "valid": True,
                "config_hash": config_hash(cfg),
                "mode": cfg.mode,
                "dimension": problem.dimension,
                "R": problem.radius,
                "B": problem.B,
            }
            if cfg.mode == MODE_SUPERSHIFT:
                payload["admissible_halfwidth"] = admissible_halfwidth(
                    problem.a, problem.B, [g.radius for g in problem.G]
                )
            else:
                frequencies = superoscillation_frequencies(problem)
                payload["limit_frequencies"] = frequencies["values"]
                payload["superoscillates"] = frequencies["superoscillates"]
            _echo_json(payload)

    return cli


def run(argv=None, config_class=Config, cli=None):
    """Runs the CLI (a new one unless given) on argv and returns the process exit code."""
    if cli is None:
        cli = create_cli(config_class)
    try:
        result = cli.main(args=argv, prog_name="superosc", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code if e.exit_code else EXIT_CONFIG
    except click.Abort:
        return EXIT_CONFIG
    if isinstance(result, int) and not isinstance(result, bool):
        return result
    return EXIT_OK
