"""
torus-holonomy command-line interface.

Commands print JSON on stdout (or write it atomically with --output) and
log to stderr. Exit codes: 0 success, 1 a certificate fails, 2 usage,
parse or I/O problem, 3 a verdict is only numerically supported.
"""

import dataclasses
import functools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import click
import numpy as np
import yaml

from lib import __version__
from lib.bundle_transport import Connection, connection_from_gens, parse_word, transport
from lib.classify_certify import (
    Certificate,
    GenConfig,
    check_ABC,
    check_ABC_config,
    check_ABC_derived,
    check_nondense,
    check_prop_cond1,
    check_thm_main,
    check_thm_main2,
    check_thm_main3,
    check_thm_main4,
    check_thm_main5,
    classify,
    default_derived_case,
    gens_from_config,
    polyhedral_config,
    su2_gens_from_config,
    u2_gens_from_config,
)
from lib.config_parser import RunConfig, RunConfigParser
from lib.errors import HolonomyError
from lib.exact_algebra import AngleSpec
from lib.kernels import set_threads
from lib.linalg_groups import (
    GroupElement,
    Rot3,
    U2Mat,
    common_kind,
    gens_from_json,
    lift_so3_pair,
    to_array,
)
from lib.orbit_explorer import covering_radius_group, group_ball, orbit, product_orbit
from lib.output_writer import dumps_json, emit, write_csv
from lib.schema_validator import SCHEMAS, validate_document, validate_file

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILS = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

SELECTORS = ('abc', 'cond1', 'main', 'main2', 'main3', 'main4', 'main5', 'nondense')


class AngleType(click.ParamType):
    """Angle flag: pi*p/q, sqrt:d*pi*p/q, sqrt:d*p/q or a decimal."""

    name = 'angle'

    def convert(self, value, param, ctx):
        if isinstance(value, AngleSpec):
            return value
        try:
            return AngleSpec.parse(value)
        except ValueError as e:
            self.fail(str(e), param, ctx)


class GenConfigType(click.ParamType):
    """Comma-separated theta1,theta2,phi[,gamma] in the angle grammar."""

    name = 'theta1,theta2,phi[,gamma]'

    def convert(self, value, param, ctx):
        if isinstance(value, GenConfig):
            return value
        parts = [p.strip() for p in value.split(',')]
        if len(parts) not in (3, 4):
            self.fail(f"expected theta1,theta2,phi[,gamma], got {value!r}", param, ctx)
        try:
            return GenConfig(*(AngleSpec.parse(p) for p in parts))
        except ValueError as e:
            self.fail(str(e), param, ctx)


class VectorType(click.ParamType):
    """Comma-separated vector; complex entries as 0.5+0.5j."""

    name = 'vector'

    def convert(self, value, param, ctx):
        if isinstance(value, np.ndarray):
            return value
        try:
            entries = [complex(p.strip()) for p in value.split(',')]
        except ValueError:
            self.fail(f"cannot parse vector {value!r}", param, ctx)
        if all(z.imag == 0 for z in entries):
            return np.array([z.real for z in entries])
        return np.array(entries)


class WordType(click.ParamType):
    """Transport word axis:winding(,axis:winding)*."""

    name = 'word'

    def convert(self, value, param, ctx):
        try:
            return parse_word(value)
        except ValueError as e:
            self.fail(str(e), param, ctx)


ANGLE = AngleType()
GEN_CONFIG = GenConfigType()
VECTOR = VectorType()
WORD = WordType()


def config_options(func):
    """Generator-configuration flags shared by several commands."""
    options = [
        click.option('--theta1', type=ANGLE, help='Rotation angle of the first generator'),
        click.option('--theta2', type=ANGLE, help='Rotation angle of the second generator'),
        click.option('--phi', type=ANGLE, help='Angle between the axes, in (0, pi/2]'),
        click.option('--gamma', type=ANGLE, default=None, help='Azimuth of the second axis (default 0)'),
        click.option('--gens', 'gens_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
                     help='Generator JSON file {kind, matrices}'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def limit_options(func):
    """Enumeration limits that override the run configuration."""
    options = [
        click.option('--max-size', type=click.IntRange(min=1), help='Element/point cap'),
        click.option('--max-depth', type=click.IntRange(min=0), help='Longest word length'),
        click.option('--tol', type=click.FloatRange(min=0, min_open=True), help='Dedup tolerance'),
        click.option('--threads', type=click.IntRange(min=1), help='Worker threads'),
        click.option('--output', '-o', type=click.Path(dir_okay=False, path_type=Path),
                     help='Write JSON here instead of stdout'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def handle_errors(func):
    """Turn library and I/O errors into exit code 2 with the message on stderr."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (HolonomyError, OSError, ValueError, KeyError, yaml.YAMLError,
                json.JSONDecodeError) as e:
            logger.debug("command failed", exc_info=True)
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_USAGE)
    return wrapper


def resolve_config(ctx: click.Context, command: str, **flags: Any) -> RunConfig:
    """Built-ins, then YAML defaults and command section, then explicit flags."""
    parser: RunConfigParser = ctx.obj['parser']
    cfg = parser.get_run_config(command).override(**flags)
    set_threads(cfg.threads)
    logger.debug(f"{command} configuration: {cfg}")
    return cfg


def build_config(theta1: Optional[AngleSpec], theta2: Optional[AngleSpec], phi: Optional[AngleSpec],
                 gamma: Optional[AngleSpec]) -> GenConfig:
    missing = [name for name, value in (('--theta1', theta1), ('--theta2', theta2), ('--phi', phi))
               if value is None]
    if missing:
        raise click.UsageError(f"missing {', '.join(missing)} (or pass --gens)")
    return GenConfig(theta1, theta2, phi, gamma or AngleSpec.rational_pi(0))


def load_gens(path: Path, orth_tol: float) -> List[GroupElement]:
    with open(path, 'r') as f:
        payload = json.load(f)
    valid, message = validate_document('generators', payload)
    if not valid:
        raise ValueError(message)
    gens = gens_from_json(payload, orth_tol)
    logger.info(f"Loaded {len(gens)} {common_kind(gens)} generators from {path}")
    return gens


def select_gens(theta1, theta2, phi, gamma, gens_path,
                orth_tol: float) -> Tuple[Optional[GenConfig], List[GroupElement]]:
    if gens_path is not None:
        return None, load_gens(gens_path, orth_tol)
    cfg = build_config(theta1, theta2, phi, gamma)
    return cfg, list(gens_from_config(cfg))


def finish(payload: Any, output: Optional[str], schema: str) -> None:
    valid, message = validate_document(schema, payload)
    if not valid:
        # a schema violation here is a bug, not bad input
        raise RuntimeError(message)
    emit(dumps_json(payload), Path(output) if output else None)


def exit_code_for(certificates: Sequence[Certificate]) -> int:
    verdicts = [c.verdict for c in certificates]
    if 'fails' in verdicts:
        return EXIT_FAILS
    if 'numeric_only' in verdicts:
        return EXIT_NUMERIC
    return EXIT_OK


@click.group()
@click.version_option(__version__, prog_name='torus-holonomy')
@click.option('--config', '-c', 'config_path', type=click.Path(dir_okay=False, path_type=Path),
              help='YAML run configuration')
@click.option('--verbose', '-v', count=True, help='-v for INFO, -vv for DEBUG logging on stderr')
@click.pass_context
def cli(ctx, config_path, verbose):
    """Torus Bundle Holonomy Toolkit

    Classify, certify and explore the holonomy groups of flat connections
    on vector bundles over the 2-torus.
    """
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    ctx.ensure_object(dict)
    try:
        ctx.obj['parser'] = RunConfigParser(config_path)
    except (FileNotFoundError, yaml.YAMLError) as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(EXIT_USAGE)


@cli.command('classify')
@config_options
@click.option('--su2', is_flag=True, help='Classify the SU(2) lifts through the double cover')
@click.option('--polyhedral', type=click.Choice(['alt4', 'sym4', 'alt5']),
              help='Use the built-in tetrahedral, octahedral or icosahedral configuration')
@limit_options
@click.pass_context
@handle_errors
def classify_cmd(ctx, theta1, theta2, phi, gamma, gens_path, su2, polyhedral,
                 max_size, max_depth, tol, threads, output):
    """Classify the group generated by two rotations."""
    cfg = resolve_config(ctx, 'classify', max_size=max_size, max_depth=max_depth, tol=tol,
                         threads=threads, output=str(output) if output else None)
    if polyhedral:
        subject: Any = polyhedral_config(polyhedral)
    elif gens_path is not None:
        subject = load_gens(gens_path, cfg.orth_tol)
    else:
        subject = build_config(theta1, theta2, phi, gamma)
    if su2:
        if not isinstance(subject, GenConfig):
            raise click.UsageError("--su2 needs a configuration, not --gens")
        subject = list(su2_gens_from_config(subject))
    result = classify(subject, cfg.max_size, cfg.max_depth, cfg.tol, cfg.threads)
    finish(result.to_json(), cfg.output, 'classification')


@cli.command('orbit')
@config_options
@click.option('--omega', type=VECTOR, required=True, help='Unit start vector, comma-separated')
@click.option('--plus', type=GEN_CONFIG, help='Plus-side configuration for an S^2 x S^2 orbit')
@click.option('--minus', type=GEN_CONFIG, help='Minus-side configuration for an S^2 x S^2 orbit')
@click.option('--points', 'points_path', type=click.Path(dir_okay=False, path_type=Path),
              help='Write orbit points as CSV here')
@click.option('--snapshots', is_flag=True, help='Record the covering radius after every level')
@click.option('--probes', type=click.IntRange(min=1), help='Probe count for the covering radius')
@click.option('--seed', type=click.IntRange(min=0), help='Probe sampling seed')
@click.option('--plane-tol', type=click.FloatRange(min=0, min_open=True), help='Confinement tolerance')
@limit_options
@click.pass_context
@handle_errors
def orbit_cmd(ctx, theta1, theta2, phi, gamma, gens_path, omega, plus, minus, points_path,
              snapshots, probes, seed, plane_tol, max_size, max_depth, tol, threads, output):
    """Enumerate the orbit of a unit vector and report its covering radius."""
    cfg = resolve_config(ctx, 'orbit', max_size=max_size, max_depth=max_depth, tol=tol,
                         threads=threads, probes=probes, seed=seed, plane_tol=plane_tol,
                         output=str(output) if output else None)
    if plus is not None or minus is not None:
        if plus is None or minus is None:
            raise click.UsageError("--plus and --minus must be given together")
        if len(omega) != 6:
            raise click.UsageError("an S^2 x S^2 orbit needs a 6-entry --omega")
        pairs = list(zip(gens_from_config(plus), gens_from_config(minus)))
        report = product_orbit(pairs, omega[:3], omega[3:], cfg.max_size, cfg.tol, cfg.max_depth,
                               cfg.probes, cfg.seed, cfg.plane_tol, cfg.threads)
    else:
        _, gens = select_gens(theta1, theta2, phi, gamma, gens_path, cfg.orth_tol)
        report = orbit(gens, omega, cfg.max_depth, cfg.max_size, cfg.tol, cfg.probes, cfg.seed,
                       cfg.plane_tol, snapshots, cfg.threads)
    if points_path is not None:
        write_csv(points_path, report.points)
    finish(report.to_json(), cfg.output, 'orbit_report')


@cli.command('certify')
@click.argument('selector', type=click.Choice(SELECTORS))
@config_options
@click.option('--plus', type=GEN_CONFIG, help='Plus-side configuration (main3)')
@click.option('--minus', type=GEN_CONFIG, help='Minus-side configuration (main3)')
@click.option('--phase', type=ANGLE, help='Central phase of the second generator (main5)')
@click.option('--case', type=click.Choice(['raw', 'products', 'dihedral_pow2', 'dihedral_prime']),
              help='Pair checked by abc: raw is the configured pair, the others a derived pair. '
                   'Defaults to dihedral_pow2 or dihedral_prime when theta1 = phi = pi/2 and '
                   'theta2 = 2 pi/n, else raw')
@click.option('--m', 'case_m', type=int, help='Exponent parameter for dihedral_pow2')
@click.option('--n', 'case_n', type=int, help='Dihedral order parameter for dihedral_prime')
@click.option('--p', 'case_p', type=int, help='Prime parameter for dihedral_prime')
@click.option('--cf-bound', type=click.IntRange(min=1), help='Continued-fraction denominator bound')
@click.option('--cf-tol', type=click.FloatRange(min=0, min_open=True), help='Continued-fraction tolerance')
@limit_options
@click.pass_context
@handle_errors
def certify_cmd(ctx, selector, theta1, theta2, phi, gamma, gens_path, plus, minus, phase, case,
                case_m, case_n, case_p, cf_bound, cf_tol, max_size, max_depth, tol, threads, output):
    """Check the hypotheses of a density theorem and print the certificates.

    SELECTOR is one of abc, cond1, main, main2, main3, main4, main5, nondense.
    """
    cfg = resolve_config(ctx, 'certify', tol=tol, threads=threads, cf_bound=cf_bound,
                         cf_tol=cf_tol, max_size=max_size, max_depth=max_depth,
                         output=str(output) if output else None)
    numeric = {'cf_bound': cfg.cf_bound, 'cf_tol': cfg.cf_tol}

    if selector == 'main3':
        if plus is None or minus is None:
            raise click.UsageError("main3 needs --plus and --minus")
        certificates = [check_thm_main3(plus, minus, **numeric)]
    elif selector in ('main4', 'main5'):
        certificates = [_certify_unitary(selector, theta1, theta2, phi, gamma, gens_path,
                                         phase, cfg)]
    else:
        gen_cfg, gens = select_gens(theta1, theta2, phi, gamma, gens_path, cfg.orth_tol)
        if len(gens) != 2 or not all(isinstance(g, Rot3) for g in gens):
            raise click.UsageError(f"{selector} needs exactly two so3 generators")
        hints: Dict[str, Any] = {}
        if gen_cfg is not None:
            hints = {'angles': (gen_cfg.theta1, gen_cfg.theta2), 'phi': gen_cfg.phi}

        if selector == 'abc':
            if case is None and gen_cfg is not None:
                implied = default_derived_case(gen_cfg)
                if implied is not None:
                    case, params = implied
                    case_m = params.get('m', case_m)
                    case_n = params.get('n', case_n)
                    case_p = params.get('p', case_p)
                    logger.info(f"Angle pattern implies --case {case} {params}")
            if case not in (None, 'raw'):
                if gen_cfg is None:
                    raise click.UsageError("--case needs a configuration, not --gens")
                certificates = check_ABC_derived(gen_cfg, case, case_m, case_n, case_p,
                                                 tol=cfg.tol, **numeric)
            elif gen_cfg is not None:
                certificates = check_ABC_config(gen_cfg, tol=cfg.tol, **numeric)
            else:
                certificates = check_ABC(gens[0], gens[1], tol=cfg.tol, **numeric)
        elif selector == 'cond1':
            if gen_cfg is None:
                raise click.UsageError("cond1 needs a configuration, not --gens")
            certificates = [check_prop_cond1(gen_cfg, tol=cfg.tol, **numeric)]
        elif selector == 'main':
            certificates = [check_thm_main(gens[0], gens[1], tol=cfg.tol, **hints, **numeric)]
        elif selector == 'main2':
            certificates = [check_thm_main2(gens[0], gens[1], tol=cfg.tol, **hints, **numeric)]
        else:
            certificates = [check_nondense(gens[0], gens[1], tol=cfg.tol, **hints, **numeric)]

    finish([c.to_json() for c in certificates], cfg.output, 'certificates')
    code = exit_code_for(certificates)
    logger.info(f"certify {selector}: exit {code}")
    sys.exit(code)


def _certify_unitary(selector, theta1, theta2, phi, gamma, gens_path, phase,
                     cfg: RunConfig) -> Certificate:
    numeric = {'cf_bound': cfg.cf_bound, 'cf_tol': cfg.cf_tol}
    if gens_path is not None:
        gens = load_gens(gens_path, cfg.orth_tol)
        if len(gens) != 2:
            raise click.UsageError(f"{selector} needs exactly two generators")
        if selector == 'main4':
            if common_kind(gens) != 'su2':
                raise click.UsageError("main4 needs su2 generators")
            return check_thm_main4(gens[0], gens[1], tol=cfg.tol, **numeric)
        b1, b2 = (U2Mat(to_array(g)) for g in gens)
        return check_thm_main5(b1, b2, **numeric)
    gen_cfg = build_config(theta1, theta2, phi, gamma)
    if selector == 'main4':
        b1, b2 = su2_gens_from_config(gen_cfg)
        return check_thm_main4(b1, b2, angles=(gen_cfg.theta1, gen_cfg.theta2), tol=cfg.tol,
                               **numeric)
    if phase is None:
        raise click.UsageError("main5 needs --phase (or --gens)")
    b1, b2 = u2_gens_from_config(gen_cfg, phase)
    return check_thm_main5(b1, b2, psi=gen_cfg.theta1, q=gen_cfg.theta2, gamma=phase, **numeric)


@cli.command('transport')
@click.option('--connection', 'connection_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help='Connection JSON file {fiber, p1, p2}')
@click.option('--gens', 'gens_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help='Generator JSON file; the connection is recovered by logarithms')
@click.option('--word', type=WORD, default='', help='Word axis:winding(,axis:winding)*')
@click.option('--vector', type=VECTOR, required=True, help='Fiber vector, comma-separated')
@click.option('--output', '-o', type=click.Path(dir_okay=False, path_type=Path),
              help='Write JSON here instead of stdout')
@click.pass_context
@handle_errors
def transport_cmd(ctx, connection_path, gens_path, word, vector, output):
    """Parallel-transport a fiber vector along a normal polygonal curve."""
    cfg = resolve_config(ctx, 'transport', output=str(output) if output else None)
    if (connection_path is None) == (gens_path is None):
        raise click.UsageError("pass exactly one of --connection and --gens")
    if connection_path is not None:
        with open(connection_path, 'r') as f:
            payload = json.load(f)
        valid, message = validate_document('connection', payload)
        if not valid:
            raise ValueError(message)
        conn = Connection.from_json(payload)
    else:
        gens = load_gens(gens_path, cfg.orth_tol)
        if len(gens) != 2:
            raise click.UsageError("a connection needs exactly two generators")
        conn = connection_from_gens(gens[0], gens[1])
    result = transport(conn, word, vector)
    if np.iscomplexobj(result):
        encoded: List[Any] = [[float(z.real), float(z.imag)] for z in result]
    else:
        encoded = [float(x) for x in result]
    payload = {'fiber': conn.fiber, 'word': word.to_text(), 'vector': encoded,
               'norm': float(np.linalg.norm(result))}
    finish(payload, cfg.output, 'transport')


@cli.command('ball')
@config_options
@click.option('--su2', is_flag=True, help='Enumerate the SU(2) lifts of the configuration')
@click.option('--plus', type=GEN_CONFIG, help='Plus-side configuration of lifted SO(4) generators')
@click.option('--minus', type=GEN_CONFIG, help='Minus-side configuration of lifted SO(4) generators')
@click.option('--snapshots', is_flag=True, help='Report the covering radius of every sub-ball')
@click.option('--probes', type=click.IntRange(min=1), help='Probe count for the covering radius')
@click.option('--seed', type=click.IntRange(min=0), help='Probe sampling seed')
@limit_options
@click.pass_context
@handle_errors
def ball_cmd(ctx, theta1, theta2, phi, gamma, gens_path, su2, plus, minus, snapshots, probes, seed,
             max_size, max_depth, tol, threads, output):
    """Enumerate a word ball in the generated group and report its covering radius."""
    cfg = resolve_config(ctx, 'ball', max_size=max_size, max_depth=max_depth, tol=tol,
                         threads=threads, probes=probes, seed=seed,
                         output=str(output) if output else None)
    if plus is not None or minus is not None:
        if plus is None or minus is None:
            raise click.UsageError("--plus and --minus must be given together")
        gens: List[GroupElement] = [lift_so3_pair(cp, cm) for cp, cm in
                                    zip(gens_from_config(plus), gens_from_config(minus))]
    elif su2:
        gens = list(su2_gens_from_config(build_config(theta1, theta2, phi, gamma)))
    else:
        _, gens = select_gens(theta1, theta2, phi, gamma, gens_path, cfg.orth_tol)

    ball = group_ball(gens, cfg.max_depth, cfg.max_size, cfg.tol, cfg.threads)
    payload = ball.to_json()
    payload['covering_radius'] = covering_radius_group(ball, cfg.probes, cfg.seed, cfg.threads)
    if snapshots:
        history = []
        size = 0
        for depth, count in enumerate(ball.growth):
            size += count
            sub = dataclasses.replace(ball, elements=ball.elements[:size])
            history.append({'depth': depth, 'size': size,
                            'covering_radius': covering_radius_group(sub, cfg.probes, cfg.seed,
                                                                     cfg.threads)})
        payload['snapshots'] = history
    finish(payload, cfg.output, 'ball')


@cli.command('validate')
@click.option('--schema', type=click.Choice(SCHEMAS),
              help='Schema to check FILES against')
@click.argument('files', nargs=-1, type=click.Path(dir_okay=False, path_type=Path))
@click.pass_context
def validate_cmd(ctx, schema, files):
    """Validate the run configuration, and FILES against a schema."""
    errors = ctx.obj['parser'].validate_config()
    for error in errors:
        click.echo(f"Error: {error}", err=True)
    ok = not errors
    if ok:
        click.echo("Run configuration is valid")
    if files and schema is None:
        raise click.UsageError("--schema is required when FILES are given")
    for path in files:
        valid, message = validate_file(schema, path)
        click.echo(f"{path}: {message}", err=not valid)
        ok = ok and valid
    sys.exit(EXIT_OK if ok else EXIT_USAGE)


def main():
    cli(obj={})


if __name__ == '__main__':
    main()
