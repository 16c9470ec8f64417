"""Command-line front end.

Every subcommand writes one CSV table (to ``--out`` or stdout) preceded by a
comment line recording the version, configuration and seed.  Exit codes:
0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, cloners, distill, pci, phasespace, privacy, qkd

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
NUMERIC_ERRORS = (ArithmeticError, FloatingPointError, np.linalg.LinAlgError, distill.PartitionNotConverged)
# Options that never change the output.
NOT_RECORDED = {"command", "func", "out", "threads", "config", "dump", "key_out", "partition_out"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    return str(v)


def _comment(args: argparse.Namespace) -> str:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in NOT_RECORDED and k != "seed"}
    body = ";".join(f"{k}={_fmt(v)}" for k, v in cfg.items())
    seed = getattr(args, "seed", None)
    return f"# cvclone {__version__} cmd={args.command} config={body} seed={'none' if seed is None else seed}"


def _table(args, columns, rows, footer=()) -> str:
    buf = io.StringIO()
    buf.write(_comment(args) + "\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in r) + "\n")
    for line in footer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_cloner(args) -> str:
    rows = [(args.n, args.m, cloners.added_variance(args.n, args.m), cloners.fidelity(args.n, args.m))]
    return _table(args, ["n", "m", "added_variance", "fidelity"], rows)


def _circuit_for(args) -> phasespace.Circuit:
    if args.circuit_file:
        return phasespace.parse_circuit(Path(args.circuit_file).read_text())
    if args.circuit == "amp":
        return cloners.build_12_circuit()
    if args.circuit == "canonical":
        return cloners.build_canonical_12_circuit()
    if args.circuit == "asym":
        return cloners.build_asymmetric_circuit(args.chi, args.lam)
    return cloners.build_NM_circuit(args.n, args.m)


def cmd_simulate_cloner(args) -> str:
    circuit = _circuit_for(args)
    psi = complex(args.psi_re, args.psi_im)
    ens = phasespace.simulate(circuit, args.shots, args.seed, psi, args.threads)
    if args.dump:
        with open(args.dump, "w") as fh:
            phasespace.write_csv(ens, fh, _comment(args)[2:])
    _, cov = phasespace.exact_moments(circuit, psi)
    rows = []
    for kind, modes, target in (("clone", circuit.clones, psi), ("anticlone", circuit.anticlones, psi.conjugate())):
        for m in modes:
            s = cloners.clone_stats(ens, m, target)
            rows.append((kind, m, s.var_x, s.var_p, s.fidelity,
                         cov[2 * m, 2 * m] - 0.5, cov[2 * m + 1, 2 * m + 1] - 0.5))
    cols = ["output", "mode", "added_var_x", "added_var_p", "fidelity", "exact_added_var_x", "exact_added_var_p"]
    return _table(args, cols, rows)


def cmd_pci_curve(args) -> str:
    curve = pci.fraction_curve(args.n, args.m, args.points)
    return _table(args, ["a", "gain", "sqrt_n_th"], curve.tolist())


def cmd_pci_stats(args) -> str:
    spec = pci.PCISpec(args.n, args.nc, args.m)
    st = pci.pci_stats(spec)
    rows = [
        ("gain", st.gain),
        ("n_th_clone", st.n_th_clone),
        ("clone_fidelity", st.clone_fidelity),
        ("n_th_anticlone", "" if st.n_th_anticlone is None else st.n_th_anticlone),
        ("anticlone_fidelity", "" if st.anticlone_fidelity is None else st.anticlone_fidelity),
    ]
    if args.shots:
        circuit = pci.build_pci_circuit(spec)
        psi = complex(args.psi_re, args.psi_im)
        ens = phasespace.simulate(circuit, args.shots, args.seed, psi, args.threads)
        mom = phasespace.estimate_moments(ens)
        c = circuit.clones[0]
        # n_th = added variance per quadrature.
        nth = 0.5 * (mom.variance(c, "x") + mom.variance(c, "p")) - 0.5
        se = 0.5 * math.hypot(mom.variance_stderr(c, "x"), mom.variance_stderr(c, "p"))
        rows += [("n_th_clone_simulated", nth), ("n_th_clone_stderr", se)]
    if args.n_conj_best:
        nc, noise = pci.best_integer_split(args.n + args.nc, args.m)
        rows += [("best_integer_n_conj", nc), ("best_integer_n_th", noise)]
    return _table(args, ["quantity", "value"], rows)


def _params(args) -> qkd.ProtocolParams:
    if args.snr is not None:
        return qkd.params_for_snr(args.snr)
    if args.sx2 is None or args.sp2 is None:
        raise ValueError("give --snr or both --sx2 and --sp2")
    return qkd.solve_params(args.sx2, args.sp2)


def cmd_qkd_balance(args) -> str:
    p = _params(args)
    r = qkd.attack_rates(p, args.chi, args.lam)
    rows = [
        ("sigma_x2", p.sigma_x2), ("sigma_p2", p.sigma_p2), ("big_x2", p.big_x2), ("big_p2", p.big_p2),
        ("I", r.i), ("I_Bx", r.i_bx), ("I_Bp", r.i_bp), ("I_Ex", r.i_ex), ("I_Ep", r.i_ep),
        ("I_Bx+I_Ep", r.i_bx + r.i_ep), ("I_Bp+I_Ex", r.i_bp + r.i_ex),
        ("key_possible", qkd.security_bound(r.i, min(r.i_bx, r.i_bp))[1]),
    ]
    return _table(args, ["quantity", "value"], rows)


def _attack(args) -> tuple[float | None, float | None]:
    if args.chi is None and args.lam is None:
        return None, None
    return (1.0 if args.chi is None else args.chi), (1.0 if args.lam is None else args.lam)


def cmd_qkd_session(args) -> str:
    p = _params(args)
    chi, lam = _attack(args)
    s = qkd.simulate_session(p, args.elements, args.seed, chi, lam)
    i = qkd.info_rate(p)
    rows = []
    for basis, name in ((qkd.X, "x"), (qkd.P, "p")):
        ib = s.bob_info(basis)
        # Bob's information in one quadrature pairs with Eve's in the other.
        ie = s.eve_info(1 - basis) if chi is not None else ""
        rows.append((name, s.bob_snr(basis), ib, ie, "" if ie == "" else ib + ie, i))
    footer = [f"sift_fraction={_fmt(s.sift_fraction)}"]
    return _table(args, ["basis", "bob_snr", "I_B", "I_E_conjugate", "sum", "I"], rows, footer)


def cmd_density_check(args) -> str:
    p = qkd.solve_params(args.sx2, args.sp2)
    if args.perturb:
        p = qkd.ProtocolParams(p.sigma_x2, p.sigma_p2, p.big_x2 * (1 + args.perturb), p.big_p2)
    diff = qkd.verify_encoding_indistinguishability(p, args.points)
    return _table(args, ["sigma_x2", "sigma_p2", "big_x2", "big_p2", "max_diff"],
                  [(p.sigma_x2, p.sigma_p2, p.big_x2, p.big_p2, diff)])


def _partition(args, channel: distill.JointChannel) -> distill.IntervalPartition:
    if args.partition_in:
        part = distill.load_partition(args.partition_in)
        if part.m != args.slices:
            raise ValueError(f"partition file has {part.m} slices, --slices is {args.slices}")
    else:
        part = distill.optimize_partition(channel, args.slices)
    if args.partition_out:
        distill.save_partition(args.partition_out, part, f"snr={_fmt(channel.snr)} slices={args.slices}")
    return part


def cmd_distill(args) -> str:
    channel = distill.JointChannel.from_snr(args.snr)
    config = distill.SliceConfig(_partition(args, channel))
    x, xp = channel.sample(args.elements, args.seed)
    rec = distill.reconcile(config, channel, x, xp, args.threshold, args.mode, args.seed)
    tr = rec.transcript
    rows = [(r.slice, r.mode, r.match_rate, r.leak_bits / tr.elements, r.residual_errors) for r in tr.slices]
    footer = [
        f"entropy={_fmt(tr.entropy)}",
        f"total_leak={_fmt(tr.leak_per_element)}",
        f"net_rate={_fmt(tr.net_rate)}",
        f"success={int(tr.success)}",
    ]
    return _table(args, ["slice", "mode", "match_rate", "leak_bits_per_element", "residual_errors"], rows, footer)


def cmd_pa(args) -> str:
    bits = privacy.read_bits(args.inp)
    seed_path = Path(args.seed_file)
    if seed_path.exists():
        spec = privacy.HashSpec(len(bits), args.length, privacy.read_bits(seed_path))
    elif args.seed is not None:
        spec = privacy.HashSpec.random(len(bits), args.length, args.seed)
        privacy.write_bits(seed_path, spec.seed_bits)
    else:
        raise ValueError(f"seed file {seed_path} does not exist and no --seed given")
    key = privacy.compress(bits, spec)
    privacy.write_bits(args.key_out, key)
    return _table(args, ["n_in", "n_out"], [(spec.n_in, spec.n_out)])


def cmd_end_to_end(args) -> str:
    params = qkd.params_for_snr(args.snr)
    chi, lam = _attack(args)
    session = qkd.simulate_session(params, args.elements, args.seed, chi, lam)
    i = qkd.info_rate(params)

    n_tot, ib_bits, ie_bits, excess, keys = 0, 0.0, 0.0, 0.0, []
    rows = []
    for basis, name, big2 in ((qkd.X, "x", params.big_x2), (qkd.P, "p", params.big_p2)):
        r, v = session.bob_pairs(basis)
        n = len(r)
        noise = float(np.var(v - r, ddof=1))
        channel = distill.JointChannel(big2, noise)
        config = distill.SliceConfig(distill.optimize_partition(channel, args.slices))
        rec = distill.reconcile(config, channel, r, v, args.threshold, args.mode, args.seed + basis)
        tr = rec.transcript
        i_b_gauss = qkd.empirical_information(r, v)
        # Eve is bounded by I - I_B; her quantized information cannot exceed it.
        i_e = max(i - i_b_gauss, 0.0)
        n_tot += n
        ib_bits += n * (tr.entropy - tr.cond_entropy)
        ie_bits += n * i_e
        excess += tr.leak_excess
        keys.append(rec.shared)
        rows += [
            (f"{name}_elements", n), (f"{name}_bob_snr", channel.snr), (f"{name}_I_B", i_b_gauss),
            (f"{name}_I_E_bound", i_e), (f"{name}_slice_entropy", tr.entropy),
            (f"{name}_leak_per_element", tr.leak_per_element), (f"{name}_net_rate", tr.net_rate),
            (f"{name}_reconciled", int(tr.success)),
        ]
    b = privacy.budget(n_tot, ib_bits / n_tot, ie_bits / n_tot, excess, args.security)
    shared = np.concatenate(keys)
    key = privacy.compress(shared, privacy.HashSpec.random(len(shared), b.n_out, args.seed))
    if args.key_out:
        privacy.write_bits(args.key_out, key)
    rows += [
        ("I", i), ("sifted_elements", n_tot), ("I_B_quantized", b.i_b), ("I_E_bound", b.i_e),
        ("leak_excess_bits", b.leak_excess), ("security_bits", b.security), ("key_bits", b.n_out),
        ("key_rate_per_sifted_element", b.rate), ("no_secrecy", b.no_secrecy),
    ]
    return _table(args, ["quantity", "value"], rows, [f"policy: {b.policy}"])


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def _positive_int(s: str) -> int:
    v = int(float(s))
    if v < 1 or v != float(s):
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def build_parser() -> _Parser:
    parser = _Parser(prog="cvclone", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cvclone {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--config", help="file of key=value lines supplying option defaults")
    common.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_, csv_out=True):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        if csv_out:
            p.add_argument("--out", help="output CSV path (default stdout)")
        return p

    p = add("cloner", cmd_cloner, "optimal N -> M cloner figures")
    p.add_argument("--n", type=_positive_int, default=1)
    p.add_argument("--m", type=_positive_int, default=2)

    p = add("simulate-cloner", cmd_simulate_cloner, "Monte Carlo run of a cloning circuit")
    p.add_argument("--circuit", choices=["amp", "canonical", "asym", "nm"], default="amp")
    p.add_argument("--circuit-file")
    p.add_argument("--n", type=_positive_int, default=1)
    p.add_argument("--m", type=_positive_int, default=2)
    p.add_argument("--chi", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--psi-re", type=float, default=0.0)
    p.add_argument("--psi-im", type=float, default=0.0)
    p.add_argument("--shots", type=_positive_int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dump", help="also write shot-level samples to this CSV")

    p = add("pci-curve", cmd_pci_curve, "gain and clone noise versus phase-conjugate fraction")
    p.add_argument("--n", type=_positive_int, default=8)
    p.add_argument("--m", type=_positive_int, default=16)
    p.add_argument("--points", type=_positive_int, default=201)

    p = add("pci-stats", cmd_pci_stats, "PCI cloner gain, noise and fidelities")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--nc", type=int, default=1)
    p.add_argument("--m", type=_positive_int, default=2)
    p.add_argument("--shots", type=int, default=0, help="also simulate with this many shots")
    p.add_argument("--psi-re", type=float, default=0.0)
    p.add_argument("--psi-im", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-conj-best", action="store_true", help="report the best integer split of n + nc inputs")

    for name, func, help_ in (
        ("qkd-balance", cmd_qkd_balance, "analytic information balance under the cloning attack"),
        ("qkd-session", cmd_qkd_session, "simulated protocol session"),
    ):
        p = add(name, func, help_)
        p.add_argument("--snr", type=float)
        p.add_argument("--sx2", type=float)
        p.add_argument("--sp2", type=float)
        if name == "qkd-balance":
            p.add_argument("--chi", type=float, default=1.0)
            p.add_argument("--lambda", dest="lam", type=float, default=1.0)
        else:
            p.add_argument("--chi", type=float)
            p.add_argument("--lambda", dest="lam", type=float)
            p.add_argument("--elements", type=_positive_int, default=100_000)
            p.add_argument("--seed", type=int, default=0)

    p = add("density-check", cmd_density_check, "compare the two encodings' density matrices")
    p.add_argument("--sx2", type=float, required=True)
    p.add_argument("--sp2", type=float, required=True)
    p.add_argument("--perturb", type=float, default=0.0, help="relative error added to the x modulation")
    p.add_argument("--points", type=_positive_int, default=101)

    p = add("distill", cmd_distill, "sliced reconciliation on a simulated Gaussian channel")
    p.add_argument("--snr", type=float, default=15.0)
    p.add_argument("--slices", type=_positive_int, default=5)
    p.add_argument("--elements", type=_positive_int, default=100_000)
    p.add_argument("--mode", choices=["ideal", "cascade", "measured"], default="ideal")
    p.add_argument("--threshold", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--partition-in")
    p.add_argument("--partition-out")

    p = add("pa", cmd_pa, "Toeplitz privacy amplification of a bit file", csv_out=False)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", dest="key_out", required=True, help="key bit file")
    p.add_argument("--seed-file", required=True)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--seed", type=int, help="create the seed file from this seed if missing")
    p.set_defaults(out=None)

    p = add("end-to-end", cmd_end_to_end, "session, reconciliation, key budget and hashing")
    p.add_argument("--snr", type=float, default=15.0)
    p.add_argument("--elements", type=_positive_int, default=100_000)
    p.add_argument("--chi", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--slices", type=_positive_int, default=5)
    p.add_argument("--mode", choices=["ideal", "cascade", "measured"], default="ideal")
    p.add_argument("--threshold", type=float, default=0.25)
    p.add_argument("--security", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--key-out")
    return parser


def _apply_config(parser: _Parser, argv: list[str], ns: argparse.Namespace) -> argparse.Namespace:
    """Re-parse with defaults from ``--config``; explicit flags still win."""
    sub = parser._subparsers._group_actions[0].choices[ns.command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for n, line in enumerate(Path(ns.config).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lstrip("-").replace("-", "_")
        key = {"lambda": "lam", "in": "inp"}.get(key, key)
        if not sep or key not in actions or key in ("help", "config"):
            raise UsageError(f"{ns.config}:{n}: unknown setting {line!r}")
        act = actions[key]
        value = value.strip()
        if isinstance(act, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes")
        else:
            try:
                defaults[key] = act.type(value) if act.type else value
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"{ns.config}:{n}: {exc}") from None
        act.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.config:
            ns = _apply_config(parser, argv, ns)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except OSError as exc:
        print(f"cvclone: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        text = ns.func(ns)
    except NUMERIC_ERRORS as exc:
        print(f"cvclone: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, IndexError, OSError) as exc:
        print(f"cvclone: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(ns, text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
