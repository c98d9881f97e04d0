"""Command-line workbench: declarative TOML configs in, JSON reports out.

Exit codes: 0 = computed (whatever the verdicts), 1 = configuration error,
2 = internal invariant violation (a bug, e.g. the freeness criteria disagree).
Expensive cohomology results are cached on disk, keyed by a digest of the
canonical config bytes plus a version stamp; cache writes are atomic.
"""

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time

import tomli

from . import __version__, assemble, bundles, sysops
from .cohomology import Cochain, CoefficientModule, cohomology
from .errors import ComputeError, ConfigError, WorkbenchError
from .factorsys import (FactorSystem, PicHomomorphism, RawFamily,
                        characteristic_class, equivalent, obstruction)
from .fdcstar import MatrixAlgebra, PicardElement
from .groups import FgAbelianGroup, subgroup_and_quotient


# -- config handling -----------------------------------------------------------

def parse_int_list(value, what):
    if isinstance(value, str):
        value = [p for p in value.replace(" ", "").split(",") if p]
    try:
        return [int(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be a list of integers, got {value!r}")


def load_config(path):
    try:
        with open(path, "rb") as fh:
            return tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}")


def canonical_config_bytes(config):
    """Deterministic serialization of a parsed config: sorted-key JSON."""
    return json.dumps(config, sort_keys=True, separators=(",", ":")).encode()


def config_digest(config, salt=""):
    return hashlib.sha256(canonical_config_bytes(config) +
                          salt.encode()).hexdigest()


def parse_group(section, key="factors"):
    if isinstance(section, (list, str)):
        factors = parse_int_list(section, key)
    else:
        factors = parse_int_list(section.get(key, section.get("group", [])), key)
    try:
        return FgAbelianGroup(factors)
    except ValueError as exc:
        raise ConfigError(str(exc))


def parse_perm(value, s):
    """One-line image, 1-based as in the config format perm = [2, 1]."""
    img = parse_int_list(value, "permutation")
    if sorted(img) != list(range(1, s + 1)):
        raise ConfigError(f"not a permutation of 1..{s}: {value!r}")
    return PicardElement([p - 1 for p in img])


def parse_algebra(config):
    section = config.get("algebra", {})
    blocks = parse_int_list(section.get("blocks", [1]), "blocks")
    order = int(section.get("scalar_order", 2))
    try:
        return MatrixAlgebra(blocks, order)
    except ValueError as exc:
        raise ConfigError(str(exc))


def parse_phi(config, group, algebra):
    section = config.get("factor_system", {})
    spec = section.get("phi")
    if spec is None:
        return PicHomomorphism.trivial(group, algebra)
    images = []
    for i in range(group.rank):
        key = f"gen{i + 1}"
        if key not in spec:
            raise ConfigError(f"phi is missing {key}")
        images.append(parse_perm(spec[key], algebra.s))
    try:
        return PicHomomorphism(group, algebra, images)
    except ValueError as exc:
        raise ConfigError(f"invalid phi: {exc}")


def _parse_omega_key(key, group):
    try:
        parts = key.replace(" ", "").split("),(")
        coords = []
        for part in parts:
            part = part.strip("()")
            coords.append(tuple(int(t) for t in part.split(",")))
        if len(coords) != 2:
            raise ValueError
        return tuple(coords)
    except ValueError:
        raise ConfigError(f"malformed omega key {key!r}; "
                          "expected \"(a,b),(c,d)\"")


def parse_omega(config, phi, truncation):
    section = config.get("factor_system", {})
    module = phi.coefficient_module(truncation)
    s = phi.algebra.s
    if "omega_bicharacter" in section:
        mat = section["omega_bicharacter"]
        rank = phi.group.rank
        if len(mat) != rank or any(len(row) != rank for row in mat):
            raise ConfigError("omega_bicharacter must be a rank x rank matrix")
        table = {}
        for pi in phi.group:
            for rho in phi.group:
                e = sum(int(mat[i][j]) * pi.coords[i] * rho.coords[j]
                        for i in range(rank) for j in range(rank)) % truncation
                if e:
                    table[(pi.coords, rho.coords)] = (e,) * s
        return Cochain(module, 2, table)
    table = {}
    for key, vec in section.get("omega", {}).items():
        coords = _parse_omega_key(key, phi.group)
        vals = parse_int_list(vec, f"omega[{key}]")
        if len(vals) != s:
            raise ConfigError(f"omega[{key}] needs {s} exponents")
        if any(all(c == 0 for c in part) for part in coords):
            raise ConfigError(f"omega[{key}]: entries at the identity must "
                              "be omitted (normalized cochains)")
        table[coords] = tuple(vals)
    return Cochain(module, 2, table)


def parse_factor_system(config):
    group = parse_group(config.get("group", {}))
    algebra = parse_algebra(config)
    phi = parse_phi(config, group, algebra)
    section = config.get("factor_system", {})
    truncation = int(section.get("truncation",
                                 max(2, group.exponent() if group.is_finite()
                                     else 2)))
    omega = parse_omega(config, phi, truncation)
    return FactorSystem(phi, omega)


# -- report plumbing ------------------------------------------------------------

def cochain_to_json(c):
    return {
        "degree": c.degree,
        "truncation": c.module.n,
        "entries": {"|".join(",".join(map(str, part)) for part in key):
                    list(vec) for key, vec in sorted(c.table.items())},
    }


def emit(report, args, out=sys.stdout):
    payload = dict(report)
    payload["version"] = __version__
    machine = json.dumps(payload, indent=2, sort_keys=True, default=str)
    if getattr(args, "report", None):
        with open(args.report, "w") as fh:
            fh.write(machine + "\n")
    lines = [f"freeact {payload['command']}"]
    for key in sorted(payload):
        if key in ("command", "timings", "version"):
            continue
        lines.append(f"  {key}: {payload[key]}")
    print("\n".join(lines), file=out)
    return 0


# -- cache ------------------------------------------------------------------------

class Cache:
    def __init__(self, directory, enabled=True):
        self.directory = directory
        self.enabled = enabled and directory is not None

    def path(self, digest):
        return os.path.join(self.directory, f"{digest}.json")

    def get(self, digest):
        if not self.enabled:
            return None
        try:
            with open(self.path(digest)) as fh:
                stored = json.load(fh)
        except (FileNotFoundError, json.JSONDecodeError):
            return None
        if stored.get("version") != __version__:
            return None
        return stored["payload"]

    def put(self, digest, payload):
        if not self.enabled:
            return
        os.makedirs(self.directory, exist_ok=True)
        data = json.dumps({"version": __version__, "payload": payload},
                          sort_keys=True)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(data)
            os.replace(tmp, self.path(digest))
        except BaseException:
            os.unlink(tmp)
            raise


# -- commands ------------------------------------------------------------------------


def cmd_cohomology(args, config):
    t0 = time.time()
    section = dict(config.get("cohomology", {}))
    if args.group:
        section["group"] = args.group
    if args.blocks:
        section["blocks"] = args.blocks
    if args.roots:
        section["roots"] = args.roots
    if args.degree is not None:
        section["degree"] = args.degree
    if args.action:
        section["action"] = [p.split(",") for p in args.action.split(";")]
    group = parse_group(section, key="group")
    s = len(parse_int_list(section.get("blocks", [1]), "blocks"))
    degree = int(section.get("degree", 2))
    truncation = int(args.truncation or section.get(
        "roots", max(2, group.exponent() if group.is_finite() else 2)))

    cache_key = config_digest({
        "group": list(group.invariant_factors), "s": s, "degree": degree,
        "truncation": truncation, "action": section.get("action")},
        salt="cohomology")
    cache = Cache(args.cache, enabled=not args.no_cache)
    cached = cache.get(cache_key)
    if cached is not None:
        cached["cache_hit"] = True
        cached["timings"] = {"total": time.time() - t0}
        return emit(cached, args)

    if group.is_finite():
        if section.get("action"):
            perms = [parse_perm(p, s) for p in section["action"]]
            phi = PicHomomorphism(group, MatrixAlgebra([1] * s, truncation),
                                  perms)
            module = phi.coefficient_module(truncation)
        else:
            module = CoefficientModule(group, truncation, s)
        result = cohomology(group, module, degree)
    else:
        result = cohomology(group, s, degree)
    report = {
        "command": "cohomology",
        "inputs_digest": cache_key,
        "group": list(group.invariant_factors),
        "degree": degree,
        "coefficients": f"mu_{truncation}^{s}" if group.is_finite() else
                        f"circle^{s}",
        "invariant_factors": result.invariant_factors,
        "raw_invariant_factors": result.raw_invariant_factors,
        "torus_rank": result.torus_rank,
        "description": result.describe(),
        "truncation": result.truncation,
        "stable_multiplier": result.stable_multiplier,
        "representatives": [cochain_to_json(r) for r in result.representatives],
        "cache_hit": False,
    }
    cache.put(cache_key, report)
    report["timings"] = {"total": time.time() - t0}
    return emit(report, args)


def cmd_check(args, config):
    fs = parse_factor_system(config)
    report = fs.verify()
    return emit({
        "command": "check",
        "inputs_digest": config_digest(config),
        "passed": report.passed,
        "violations": [{"kind": v.kind, "args": str(v.args), "detail": v.detail}
                       for v in report.violations[:50]],
    }, args)


def _build_report(fs, dump_path=None, seed=0):
    system = assemble.build(fs)
    battery = assemble.freeness(system).require_coherent()
    gns = assemble.gns_checks(system, seed=seed)
    simplicity = assemble.simplicity_report(system)
    out = {
        "dimension": system.dim,
        "scalar_order": system.scalar_order,
        "fixed_algebra_dimension": len(system.fixed_basis()),
        "center_dimension": simplicity.center_dim,
        "simple": simplicity.simple,
        "free": battery.free,
        "freeness": {
            "isotypic": battery.isotypic_ok,
            "ellwood": [battery.ellwood_rank, battery.ellwood_target],
            "crossed_product": [battery.crossed_rank, battery.crossed_target],
        },
        "gns": {
            "faithful": gns.faithful,
            "positivity": gns.positivity_ok,
            "operator_inequality": gns.operator_inequality_ok,
            "adjoint_formula": gns.adjoint_ok,
        },
    }
    if dump_path:
        with open(dump_path, "w") as fh:
            json.dump(system.to_json(), fh)
        out["system_file"] = dump_path
    return system, out


def cmd_build(args, config):
    t0 = time.time()
    fs = parse_factor_system(config)
    system, out = _build_report(fs, dump_path=args.dump_system, seed=args.seed)
    out.update({
        "command": "build",
        "inputs_digest": config_digest(config),
        "timings": {"total": time.time() - t0},
    })
    if args.structure_constants:
        consts = {}
        for i in range(system.dim):
            for j in range(system.dim):
                for k, v in system.mul[i][j].items():
                    consts[f"{i},{j},{k}"] = repr(v)
        out["structure_constants"] = consts
    return emit(out, args)


def _structure_digest(system):
    blob = []
    for i in range(system.dim):
        for j in range(system.dim):
            for k in sorted(system.mul[i][j]):
                blob.append(f"{i},{j},{k},{system.mul[i][j][k].coeffs}")
    return hashlib.sha256("|".join(blob).encode()).hexdigest()[:16]


def cmd_classify(args, config):
    t0 = time.time()
    group = parse_group(config.get("group", {}))
    algebra = parse_algebra(config)
    phi = parse_phi(config, group, algebra)
    truncation = int(args.truncation or
                     config.get("factor_system", {}).get(
                         "truncation",
                         max(2, group.exponent() if group.is_finite() else 2)))
    if not group.is_finite():
        result = cohomology(group, phi.coefficient_module(truncation), 2)
        return emit({
            "command": "classify",
            "inputs_digest": config_digest(config),
            "class_count": 1 if result.order() == 1 else str(result.order()),
            "h2": result.describe(),
            "note": "infinite dual group: closed form, no assembly",
            "timings": {"total": time.time() - t0},
        }, args)
    module = phi.coefficient_module(truncation)
    result = cohomology(group, module, 2)
    base = FactorSystem.canonical(phi, truncation)
    classes = result.all_classes()
    systems = []
    for coords, rep in classes:
        fs = base.twist(rep)
        system, out = _build_report(fs)
        systems.append((coords, fs, system, out))
    matrix = []
    for _, fs1, _, _ in systems:
        row = []
        for _, fs2, _, _ in systems:
            row.append(1 if equivalent(fs1, fs2).equivalent else 0)
        matrix.append(row)
    for i in range(len(systems)):
        for j in range(len(systems)):
            if (matrix[i][j] == 1) != (i == j):
                raise ComputeError("twist classes are not pairwise inequivalent")
    return emit({
        "command": "classify",
        "inputs_digest": config_digest(config),
        "h2": result.describe(),
        "h2_truncation": result.truncation,
        "class_count": len(systems),
        "classes": [{
            "coordinates": list(coords),
            "structure_digest": _structure_digest(system),
            **out,
        } for coords, fs, system, out in systems],
        "equivalence_matrix": matrix,
        "timings": {"total": time.time() - t0},
    }, args)


def cmd_equiv(args, config):
    fs1 = parse_factor_system(config)
    config2 = dict(config)
    if "factor_system2" not in config:
        raise ConfigError("equiv needs a [factor_system2] section")
    config2["factor_system"] = config["factor_system2"]
    fs2 = parse_factor_system(config2)
    verdict = equivalent(fs1, fs2)
    return emit({
        "command": "equiv",
        "inputs_digest": config_digest(config),
        "equivalent": verdict.equivalent,
        "reason": verdict.reason,
        "witness": cochain_to_json(verdict.witness) if verdict.witness else None,
    }, args)


def cmd_twist(args, config):
    fs = parse_factor_system(config)
    section = config.get("twist", {})
    twist_config = {"group": config.get("group", {}),
                    "algebra": config.get("algebra", {}),
                    "factor_system": {"omega": section.get("omega", {}),
                                      "truncation": fs.truncation}}
    if "omega_bicharacter" in section:
        twist_config["factor_system"]["omega_bicharacter"] = \
            section["omega_bicharacter"]
    omega2 = parse_omega(twist_config, fs.phi, fs.truncation)
    twisted = fs.twist(omega2)
    return emit({
        "command": "twist",
        "inputs_digest": config_digest(config),
        "verified": twisted.verify().passed,
        "omega": cochain_to_json(twisted.omega),
    }, args)


def cmd_obstruct(args, config):
    group = parse_group(config.get("group", {}))
    algebra = parse_algebra(config)
    phi = parse_phi(config, group, algebra)
    section = config.get("raw_family", {})
    truncation = int(section.get("truncation", max(2, group.exponent())))
    deviation_config = {"group": config.get("group", {}),
                        "algebra": config.get("algebra", {}),
                        "factor_system": dict(section)}
    deviation = parse_omega(deviation_config, phi, truncation)
    raw = RawFamily(phi, deviation)
    report = obstruction(raw)
    chi = characteristic_class(phi, truncation=truncation, raw=raw)
    return emit({
        "command": "obstruct",
        "inputs_digest": config_digest(config),
        "obstruction": cochain_to_json(report.cochain),
        "is_cocycle": report.is_cocycle,
        "already_factor_system": report.vanishes,
        "chi_trivial": chi.trivial,
        "chi_certificate": cochain_to_json(chi.certificate)
        if chi.certificate is not None else None,
        "chi_class_coordinates": list(chi.class_coordinates),
        "truncation": chi.truncation,
    }, args)


def cmd_bundle(args, config):
    fs = parse_factor_system(config)
    flip = bundles.flip_cocycle(fs)
    out = {
        "command": "bundle",
        "inputs_digest": config_digest(config),
        "flip_zero": flip.is_zero(),
        "flip": cochain_to_json(flip.cochain),
    }
    chi2 = bundles.secondary_class(fs.phi, truncation=fs.truncation, fs=fs)
    out["chi2_trivial"] = chi2.trivial
    if flip.is_zero():
        report = bundles.realize_bundle(fs)
        out.update({
            "total_space_points": report.space_size,
            "points": [list(map(str, p)) for p in report.points],
            "action": {",".join(map(str, k)): v
                       for k, v in report.action.items()},
            "orbit_map": report.base_points,
        })
        space = bundles.FiniteSpace(fs.algebra.s)
        cls = bundles.classify_bundles(space, fs.group, fs.phi,
                                       truncation=fs.truncation)
        out["bundle_class_count"] = cls.class_count
        out["h2_total_order"] = cls.total_h2_order
    else:
        out["note"] = "flip nonzero: the algebra is noncommutative, no bundle"
    return emit(out, args)


def cmd_ops(args, config):
    section = config.get("ops", {})
    op = section.get("op", args.op)
    if not op:
        raise ConfigError("ops needs op = restrict|quotient|tensor|mix")

    def load_system(key):
        path = section.get(key)
        if path is None:
            raise ConfigError(f"ops.{op} needs a '{key}' system file")
        try:
            with open(path) as fh:
                return assemble.DynamicalSystem.from_json(json.load(fh))
        except FileNotFoundError:
            raise ConfigError(f"system file not found: {path}")

    if op in ("restrict", "quotient"):
        system = load_system("system")
        gens_spec = section.get("subgroup_generators", [])
        gens = [system.group.element(parse_int_list(g, "generator"))
                for g in gens_spec]
        sq = subgroup_and_quotient(system.group, gens)
        func = sysops.restrict if op == "restrict" else sysops.quotient
        result, report = func(system, sq)
        payload = {
            "result_dimension": result.dim,
            "result_group": list(result.group.invariant_factors),
            "free": report.free,
        }
    elif op == "tensor":
        left, right = load_system("left"), load_system("right")
        result, report = sysops.tensor(left, right)
        payload = {
            "result_dimension": result.dim,
            "result_group": list(result.group.invariant_factors),
            "free": report.free,
        }
    elif op == "mix":
        left, right = load_system("left"), load_system("right")
        beta_sys = load_system("beta_system")
        if beta_sys.dim != left.dim:
            raise ConfigError("beta_system must act on the left system's algebra")
        beta = sysops.CommutingAction(left, right.group, beta_sys.action)
        (part_a, rep_a), (part_b, rep_b) = sysops.commuting_mix(left, beta, right)
        result = part_b
        payload = {
            "product_dimension": part_a.dim,
            "product_free": rep_a.free,
            "result_dimension": part_b.dim,
            "result_group": list(part_b.group.invariant_factors),
            "free": rep_b.free,
        }
    else:
        raise ConfigError(f"unknown op {op!r}")
    if section.get("out"):
        with open(section["out"], "w") as fh:
            json.dump(result.to_json(), fh)
        payload["system_file"] = section["out"]
    payload.update({"command": f"ops.{op}",
                    "inputs_digest": config_digest(config)})
    return emit(payload, args)


COMMANDS = {
    "cohomology": cmd_cohomology,
    "check": cmd_check,
    "build": cmd_build,
    "classify": cmd_classify,
    "equiv": cmd_equiv,
    "twist": cmd_twist,
    "obstruct": cmd_obstruct,
    "bundle": cmd_bundle,
    "ops": cmd_ops,
}


def make_parser():
    parser = argparse.ArgumentParser(
        prog="freeact",
        description="workbench for free actions of finite abelian groups on "
                    "finite-dimensional C*-algebras")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--report", default=None)
        p.add_argument("--truncation", type=int, default=None)
        p.add_argument("--cache", default=".freeact_cache")
        p.add_argument("--no-cache", action="store_true")
        p.add_argument("--seed", type=int, default=0)
        if name == "cohomology":
            p.add_argument("--group", default=None)
            p.add_argument("--blocks", default=None)
            p.add_argument("--roots", type=int, default=None)
            p.add_argument("--action", default=None)
            p.add_argument("--degree", type=int, default=None)
        if name == "build":
            p.add_argument("--dump-system", default=None)
            p.add_argument("--structure-constants", action="store_true")
        if name == "ops":
            p.add_argument("--op", default=None)
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    config = {}
    if args.config:
        try:
            config = load_config(args.config)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 1
    try:
        return COMMANDS[args.command](args, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ComputeError as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return 2
    except WorkbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
