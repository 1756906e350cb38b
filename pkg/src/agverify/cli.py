"""Command-line front end.

Subcommands: check (compositional verification), interface (interface
generation), replay (trace simulation), compose and abstract (inspection
utilities).  Exit codes are a stable contract: 0 = property holds / command
succeeded, 1 = property violated, 2 = usage, parse or resource error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import formula as F
from . import lia
from .agfinite import AgTask, verify_compositional
from .aginfinite import ResourceExhausted, Session
from .csm import (Csm, ModelError, ResourceLimit, check_reachability,
                  complement_property, compose, compose_all, simulate_trace,
                  trace_csm)
from .dot import to_dot
from .interface_gen import InterfaceSession
from .lstar import LearningLimit
from .modelfile import (CsmBlock, ModelFile, ParseError, PredsBlock,
                        SymbolicBlock, csm_block_of, parse_model, print_model,
                        _print_block)
from .symbolic import (PredicateSet, abstract_may, abstract_must,
                       simulate_symbolic)

EXIT_HOLDS = 0
EXIT_VIOLATED = 1
EXIT_ERROR = 2


def _load(path):
    with open(path) as f:
        return parse_model(f.read())


def _component(model, name):
    try:
        b = model[name]
    except KeyError:
        raise ModelError("no block named %r in the model file" % name)
    if isinstance(b, SymbolicBlock):
        return b.to_component(), True
    if isinstance(b, CsmBlock):
        return b.to_csm(), False
    raise ModelError("block %r is not a component" % name)


def _property(model, name):
    b = model[name]
    if not isinstance(b, CsmBlock):
        raise ModelError("block %r is not a property" % name)
    return b.to_csm()


def _preds(model, name):
    if name is None:
        return None
    b = model[name]
    if not isinstance(b, PredsBlock):
        raise ModelError("block %r is not a preds block" % name)
    return b.to_predicates()


def _solver(args):
    if getattr(args, "smt_dump", None):
        os.makedirs(args.smt_dump, exist_ok=True)
        return lia.Solver(dump_dir=args.smt_dump)
    return lia.Solver()


def _write_dot(args, machine, name):
    if getattr(args, "dot", None):
        os.makedirs(args.dot, exist_ok=True)
        path = os.path.join(args.dot, "%s.dot" % name)
        with open(path, "w") as f:
            f.write(to_dot(machine, name))
        return path
    return None


def _emit(args, report):
    report["schema"] = 1
    if getattr(args, "report", None):
        with open(args.report, "w") as f:
            json.dump(report, f, indent=2)
            f.write("\n")
    return report


# ------------------------------------------------------------------ check

def cmd_check(args):
    model = _load(args.model)
    m1, sym1 = _component(model, args.m1)
    m2, sym2 = _component(model, args.m2)
    p = _property(model, args.p)
    log = []
    t0 = time.time()
    report = {"command": "check", "model": args.model,
              "components": [args.m1, args.m2], "property": args.p}
    if sym1 or sym2:
        session = Session(m1, m2, p,
                          preds1=_preds(model, args.preds1),
                          preds2=_preds(model, args.preds2),
                          max_refinements=args.max_refinements,
                          max_conjectures=args.max_conjectures,
                          solver=_solver(args), event_log=log, seed=args.seed)
        verdict = session.run()
        report["verdict"] = verdict.status
        report["stats"] = verdict.stats
        if verdict.status == "Violated":
            report["counterexample"] = list(verdict.cex)
        if verdict.status == "ResourceExhausted":
            report["reason"] = verdict.reason
        assumption = verdict.assumption
    else:
        task = AgTask(m1, m2, p)
        v = verify_compositional(task, max_conjectures=args.max_conjectures,
                                 event_log=log)
        conjectures = sum(1 for e in log if e.get("event") == "conjecture")
        queries = sum(1 for e in log if e.get("event") == "query")
        report["verdict"] = "Holds" if v.holds else "Violated"
        report["stats"] = {"conjectures": conjectures,
                           "membership_queries": queries}
        if not v.holds:
            report["counterexample"] = list(v.cex)
        assumption = v.assumption
    report["time_seconds"] = round(time.time() - t0, 6)
    if assumption is not None:
        restricted = assumption.restricted_csm()
        report["assumption"] = {
            "states": restricted.n_states,
            "alphabet": sorted(assumption.alphabet),
            "model": _print_block(csm_block_of(restricted, "Assumption")),
        }
        _write_dot(args, restricted, "assumption")
    if args.trace_learning:
        report["log"] = log
    _emit(args, report)
    _print_verdict(report)
    return {"Holds": EXIT_HOLDS, "Violated": EXIT_VIOLATED}.get(
        report["verdict"], EXIT_ERROR)


def _print_verdict(report):
    print("verdict: %s" % report["verdict"])
    if "assumption" in report:
        print("assumption states: %d over {%s}" % (
            report["assumption"]["states"],
            ", ".join(report["assumption"]["alphabet"])))
    if "counterexample" in report:
        print("counterexample: %s" % " ".join(report["counterexample"]))
    if "reason" in report:
        print("reason: %s" % report["reason"])
    for key, value in sorted(report.get("stats", {}).items()):
        print("  %s: %s" % (key, value))


# --------------------------------------------------------------- interface

def cmd_interface(args):
    model = _load(args.model)
    c, _ = _component(model, args.component)
    sigma = _actions(args.sigma) if args.sigma else c.alphabet
    log = []
    t0 = time.time()
    session = InterfaceSession(c, sigma, preds=_preds(model, args.preds),
                               max_refinements=args.max_refinements,
                               max_conjectures=args.max_conjectures,
                               max_subset_states=args.max_subset_states,
                               solver=_solver(args), event_log=log)
    if not getattr(c, "error_locations", None) and not getattr(
            c, "error_states", None):
        print("warning: component has no error states; "
              "the interface will accept everything", file=sys.stderr)
    result = session.run()
    iface = result.interface.restricted_csm()
    report = {"command": "interface", "model": args.model,
              "component": args.component, "verdict": "Holds",
              "sigma": sorted(sigma),
              "interface": {
                  "states": iface.n_states,
                  "model": _print_block(csm_block_of(iface, "Interface")),
              },
              "stats": result.stats,
              "time_seconds": round(time.time() - t0, 6)}
    if args.trace_learning:
        report["log"] = log
    _write_dot(args, iface, "interface")
    _emit(args, report)
    print("interface states: %d over {%s}" % (iface.n_states,
                                              ", ".join(sorted(sigma))))
    print(report["interface"]["model"])
    return EXIT_HOLDS


# ------------------------------------------------------------------ replay

def cmd_replay(args):
    model = _load(args.model)
    trace = tuple(_actions(args.trace))
    names = args.names
    report = {"command": "replay", "model": args.model, "trace": list(trace)}
    if len(names) == 1 and isinstance(model[names[0]], SymbolicBlock):
        c = model[names[0]].to_component()
        may = abstract_may(c, _preds(model, args.preds) or PredicateSet(),
                           solver=_solver(args))
        from .symbolic import find_feasible_path
        path = find_feasible_path(c, may, trace)
        if path is None:
            # locate the first failing prefix
            k = len(trace)
            for i in range(len(trace) + 1):
                if find_feasible_path(c, may, trace[:i]) is None:
                    k = i
                    break
            print("infeasible at step %d" % k)
            report["result"] = "infeasible"
            report["failed_at"] = k
        else:
            locs = [c.initial] + [e.dst for e in path]
            for i, e in enumerate(path):
                print("step %d: %s  ->  %s" % (i + 1, e.label, e.dst))
            err = locs[-1] in c.error_locations
            print("error reached" if err else "feasible, no error")
            report["result"] = "error" if err else "feasible"
        _emit(args, report)
        return EXIT_HOLDS
    machines = []
    for n in names:
        b = model[n]
        if isinstance(b, SymbolicBlock):
            raise ModelError("replay over several blocks requires finite "
                             "machines; %r is symbolic" % n)
        machines.append(b.to_csm() if b.kind == "csm"
                        else complement_property(b.to_csm()).as_csm())
    system = compose_all(machines)
    for a in trace:
        if a not in system.alphabet:
            raise ModelError("action %r not in the system alphabet" % a)
    guided = compose(trace_csm(trace, system.alphabet), system)
    v = check_reachability(guided)
    sim = simulate_trace(system, trace)
    current = system.tau_closure(system.initial)
    adj = system.adjacency()
    for i, a in enumerate(trace):
        nxt = set()
        for q in current:
            for t in adj[q]:
                if t.label == a:
                    nxt |= system.tau_closure(t.dst)
        if not nxt:
            print("step %d: %s  ->  blocked" % (i + 1, a))
            break
        current = frozenset(nxt)
        print("step %d: %s  ->  {%s}" % (
            i + 1, a, ", ".join(sorted(system.state_name(q)
                                       for q in current))))
    if not trace:
        print("initial: {%s}" % ", ".join(sorted(system.state_name(q)
                                                 for q in current)))
    err = not v.safe
    report["result"] = ("error" if err else
                        "accepted" if sim.accepted else "blocked")
    if not sim.accepted:
        report["failed_at"] = sim.failed_at
    print("error reached" if err else
          "trace accepted, no error" if sim.accepted else
          "trace blocked at step %d" % (sim.failed_at + 1))
    _emit(args, report)
    return EXIT_HOLDS


# ------------------------------------------------- compose / abstract

def cmd_compose(args):
    model = _load(args.model)
    machines = []
    for n in args.names:
        m, sym = _component(model, n)
        if sym:
            raise ModelError("compose works on finite machines; %r is "
                             "symbolic (use abstract first)" % n)
        machines.append(m)
    product = compose_all(machines)
    name = "_".join(args.names)
    path = _write_dot(args, product, name)
    print(_print_block(csm_block_of(product, name)))
    if path:
        print("dot written to %s" % path, file=sys.stderr)
    return EXIT_HOLDS


def cmd_abstract(args):
    model = _load(args.model)
    b = model[args.component]
    if not isinstance(b, SymbolicBlock):
        raise ModelError("abstract needs a symbolic block")
    c = b.to_component()
    preds = _preds(model, args.preds) or PredicateSet()
    build = abstract_must if args.must else abstract_may
    m = build(c, preds, solver=_solver(args))
    kind = "must" if args.must else "may"
    name = "%s_%s" % (args.component, kind)
    path = _write_dot(args, m, name)
    print(_print_block(csm_block_of(m, name)))
    if path:
        print("dot written to %s" % path, file=sys.stderr)
    return EXIT_HOLDS


def _actions(text):
    if isinstance(text, (list, tuple)):
        return [a for chunk in text for a in _actions(chunk)]
    return [a for a in text.replace(",", " ").split() if a]


# ------------------------------------------------------------------ main

def _add_common(sp):
    sp.add_argument("--max-conjectures", type=int, default=1000)
    sp.add_argument("--max-refinements", type=int, default=50)
    sp.add_argument("--havoc-bound", type=int, default=20,
                    help="bound for the concrete exploration oracle")
    sp.add_argument("--trace-learning", action="store_true",
                    help="include the full learning log in the report")
    sp.add_argument("--dot", metavar="DIR", help="write DOT graphs here")
    sp.add_argument("--smt-dump", metavar="DIR",
                    help="dump every satisfiability query as SMT-LIB 2")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--report", metavar="FILE", help="write a JSON report")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="agverify",
        description="Compositional verification with learned assumptions")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("check", help="verify M1 || M2 |= P")
    sp.add_argument("model")
    sp.add_argument("m1")
    sp.add_argument("m2")
    sp.add_argument("p")
    sp.add_argument("--preds1", help="initial predicates for M1")
    sp.add_argument("--preds2", help="initial predicates for M2")
    _add_common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("interface", help="generate a component interface")
    sp.add_argument("model")
    sp.add_argument("component")
    sp.add_argument("--sigma", help="interface alphabet, comma separated")
    sp.add_argument("--preds", help="initial predicates")
    sp.add_argument("--max-subset-states", type=int, default=1 << 14)
    _add_common(sp)
    sp.set_defaults(func=cmd_interface)

    sp = sub.add_parser("replay", help="simulate a trace")
    sp.add_argument("model")
    sp.add_argument("names", nargs="+",
                    help="component/property blocks to compose")
    sp.add_argument("--trace", required=True,
                    help="actions, comma or space separated")
    sp.add_argument("--preds", help="predicates for a symbolic component")
    _add_common(sp)
    sp.set_defaults(func=cmd_replay)

    sp = sub.add_parser("compose", help="compose finite machines")
    sp.add_argument("model")
    sp.add_argument("names", nargs="+")
    _add_common(sp)
    sp.set_defaults(func=cmd_compose)

    sp = sub.add_parser("abstract", help="predicate-abstract a component")
    sp.add_argument("model")
    sp.add_argument("component")
    sp.add_argument("preds", nargs="?")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--may", action="store_true", default=True)
    group.add_argument("--must", action="store_true", default=False)
    _add_common(sp)
    sp.set_defaults(func=cmd_abstract)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ModelError, F.FormulaSyntaxError) as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_ERROR
    except (ResourceExhausted, ResourceLimit, lia.ResourceError,
            LearningLimit) as e:
        print("resource limit: %s" % e, file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
