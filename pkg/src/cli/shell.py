# src/cli/shell.py

import argparse
import json
from typing import Callable, Optional

import cmd2
from cmd2 import Cmd2ArgumentParser, with_argparser

from ..graph.components import c2_components, c_components
from ..ncm.query import AteQuery, parse_query
from ..train.config import SE_FORMULAS, TrainConfig
from ..utils.errors import WideningError
from ..utils.logger import RunLogger
from .experiments import (DESK_CONFIG, DESK_REPEATS, DESK_SAMPLE_GRID, DESK_SAMPLES, DESK_TRIALS,
                          HIGH_DIM_BITS, VERDICT_TAU, WIDEN_THRESHOLD, benchmark_est, benchmark_id,
                          generate_dataset, load_dataset, resolve_graph, run_estimate, run_identify,
                          summary_frame, write_outputs)
from .report import DEFAULT_TAUS, ExperimentReport

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_FAIL_VERDICT = 3

PIPELINE_COMMANDS = {'gen_data', 'identify', 'estimate', 'benchmark_id', 'benchmark_est',
                     'report', 'show_graph'}


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group('training')
    group.add_argument('--config', help='settings file (JSON or key=value lines)')
    group.add_argument('--seed', type=int, help='base seed')
    group.add_argument('--epochs', type=int)
    group.add_argument('--mc-samples', type=int, help='exogenous samples per training step')
    group.add_argument('--estimation-mc-samples', type=int,
                       help='exogenous samples for final estimates')
    group.add_argument('--lambda-start', type=float)
    group.add_argument('--lambda-end', type=float)
    group.add_argument('--se-formula', choices=SE_FORMULAS)
    group.add_argument('--workers', type=int, help='worker processes')
    group.add_argument('--quiet', action='store_true', help='do not echo log lines')


def train_config(args: argparse.Namespace, base: TrainConfig = DESK_CONFIG) -> TrainConfig:
    """Defaults, then the --config file, then explicit flags."""
    cfg = base
    if args.config:
        cfg = TrainConfig.from_file(args.config, base=cfg)
    return cfg.with_overrides(seed=args.seed, epochs=args.epochs, mc_samples=args.mc_samples,
                              estimation_mc_samples=args.estimation_mc_samples,
                              lambda_start=args.lambda_start, lambda_end=args.lambda_end,
                              se_formula=args.se_formula, workers=args.workers)


def _query_for(text: Optional[str], bench):
    if text:
        return parse_query(text)
    if bench is not None:
        return AteQuery(bench.treatment, bench.outcome)
    return AteQuery()


gen_data_parser = Cmd2ArgumentParser(description='Sample a dataset from a random canonical SCM')
gen_data_parser.add_argument('--graph', required=True, help='diagram file or benchmark name')
gen_data_parser.add_argument('--n', type=int, default=DESK_SAMPLES, help='rows to sample')
gen_data_parser.add_argument('--seed', type=int, default=0)
gen_data_parser.add_argument('--treatment', help='treatment variable (default X)')
gen_data_parser.add_argument('--outcome', help='outcome variable (default Y)')
gen_data_parser.add_argument('--widen', type=float, nargs='?', const=WIDEN_THRESHOLD,
                             help='minimum |ATE - TV| of the generating model')
gen_data_parser.add_argument('--high-dim', type=int, nargs='?', const=HIGH_DIM_BITS,
                             help='expand covariates to this many bits')
gen_data_parser.add_argument('--out', required=True, help='CSV path')
gen_data_parser.add_argument('--quiet', action='store_true')

identify_parser = Cmd2ArgumentParser(description='Decide identifiability of a query from data')
identify_parser.add_argument('--data', required=True, help='dataset CSV')
identify_parser.add_argument('--graph', required=True, help='diagram file or benchmark name')
identify_parser.add_argument('--query', help="e.g. 'ATE(X,Y)' or 'P(Y=1|do(X=1))'")
identify_parser.add_argument('--tau', type=float, default=VERDICT_TAU)
identify_parser.add_argument('--repeats', type=int, default=DESK_REPEATS)
identify_parser.add_argument('--symbolic', action='store_true',
                             help='symbolic identification plus one likelihood-trained NCM')
identify_parser.add_argument('--out', help='directory for report.json and gap traces')
_add_train_flags(identify_parser)

estimate_parser = Cmd2ArgumentParser(description='Estimate a query with an NCM and the naive baseline')
estimate_parser.add_argument('--data', required=True, help='dataset CSV')
estimate_parser.add_argument('--graph', required=True, help='diagram file or benchmark name')
estimate_parser.add_argument('--query', help="e.g. 'ATE(X,Y)' or 'P(Y=1|do(X=1))'")
estimate_parser.add_argument('--out', help='report JSON path')
estimate_parser.add_argument('--save-model', help='checkpoint path for the trained NCM')
_add_train_flags(estimate_parser)

benchmark_id_parser = Cmd2ArgumentParser(description='Identification sweep over benchmark graphs')
benchmark_id_parser.add_argument('--graphs', nargs='*', help='benchmark names (default: all)')
benchmark_id_parser.add_argument('--trials', type=int, default=DESK_TRIALS)
benchmark_id_parser.add_argument('--n', type=int, default=DESK_SAMPLES)
benchmark_id_parser.add_argument('--tau', type=float, nargs='+', default=list(DEFAULT_TAUS))
benchmark_id_parser.add_argument('--repeats', type=int, default=DESK_REPEATS)
benchmark_id_parser.add_argument('--widen', type=float, default=WIDEN_THRESHOLD)
benchmark_id_parser.add_argument('--no-widen', action='store_true')
benchmark_id_parser.add_argument('--out', default='results/benchmark_id')
_add_train_flags(benchmark_id_parser)

benchmark_est_parser = Cmd2ArgumentParser(description='Estimation sweep over sample sizes')
benchmark_est_parser.add_argument('--graphs', nargs='*', help='identifiable benchmark names')
benchmark_est_parser.add_argument('--samples', type=int, nargs='+', default=list(DESK_SAMPLE_GRID))
benchmark_est_parser.add_argument('--trials', type=int, default=DESK_TRIALS)
benchmark_est_parser.add_argument('--widen', type=float, default=WIDEN_THRESHOLD)
benchmark_est_parser.add_argument('--no-widen', action='store_true')
benchmark_est_parser.add_argument('--out', default='results/benchmark_est')
_add_train_flags(benchmark_est_parser)

report_parser = Cmd2ArgumentParser(description='Summarise a saved benchmark report')
report_parser.add_argument('path', help='report.json')
report_parser.add_argument('--out', help='directory to rewrite the CSV outputs into')

show_graph_parser = Cmd2ArgumentParser(description='Describe a diagram')
show_graph_parser.add_argument('graph', help='diagram file or benchmark name')


class CausalCLI(cmd2.Cmd):
    """
    Shell for the causal identification toolkit.

    Every command is also reachable in one shot from `main.py`; the exit
    code of the last command is kept in `exit_code`.
    """

    def __init__(self):
        super().__init__(allow_cli_args=False)
        self.logger = RunLogger()
        self.intro = 'Neural causal identification toolkit. Type help or ? to list commands.'
        self.prompt = 'ncm> '

    def precmd(self, statement):
        # argparse failures never reach the command body
        self.exit_code = EXIT_USAGE if statement.command in PIPELINE_COMMANDS else EXIT_OK
        return statement

    def default(self, statement):
        super().default(statement)
        self.exit_code = EXIT_USAGE

    def _execute(self, action: Callable[[], int]) -> None:
        try:
            self.exit_code = action()
        except (ValueError, RuntimeError, OSError, KeyError) as e:
            self.perror(f"Error: {e}")
            self.exit_code = EXIT_RUNTIME

    def _quiet(self, args: argparse.Namespace) -> None:
        self.logger.echo = not getattr(args, 'quiet', False)

    @with_argparser(gen_data_parser)
    def do_gen_data(self, args):
        """Sample a dataset and write it with its ground-truth sidecar."""
        def action() -> int:
            self._quiet(args)
            graph, bench = resolve_graph(args.graph)
            treatment = args.treatment or (bench.treatment if bench else 'X')
            outcome = args.outcome or (bench.outcome if bench else 'Y')
            try:
                data, model = generate_dataset(graph, args.n, args.seed, treatment, outcome,
                                               args.widen, args.high_dim, self.logger)
            except WideningError as e:
                self.perror(f"Error: {e}")
                return EXIT_RUNTIME
            data.to_csv(args.out)
            self.logger.log_operation("WRITE", args.out, True, f"{data.n} rows")
            truth = data.metadata['truth']
            self.poutput(f"Wrote {data.n} rows x {len(data.variables)} columns to {args.out}")
            self.poutput(f"ATE {truth['ate']:.6f}  TV {truth['tv']:.6f}  model {model.model_hash()}")
            return EXIT_OK
        self._execute(action)

    @with_argparser(identify_parser)
    def do_identify(self, args):
        """Run the identification test; exit code 3 when the verdict is FAIL."""
        def action() -> int:
            self._quiet(args)
            graph, bench = resolve_graph(args.graph)
            query = _query_for(args.query, bench)
            cfg = train_config(args)
            data = load_dataset(args.data, self.logger)
            report = run_identify(data, graph, query, cfg, args.tau, args.repeats,
                                  args.symbolic, args.out, self.logger)
            self.poutput(json.dumps(report, indent=2, sort_keys=True))
            return EXIT_OK if report['verdict'] == 'identifiable' else EXIT_FAIL_VERDICT
        self._execute(action)

    @with_argparser(estimate_parser)
    def do_estimate(self, args):
        """Estimate a query and compare with the naive model."""
        def action() -> int:
            self._quiet(args)
            graph, bench = resolve_graph(args.graph)
            query = _query_for(args.query, bench)
            cfg = train_config(args)
            data = load_dataset(args.data, self.logger)
            report = run_estimate(data, graph, query, cfg, args.out, args.save_model, self.logger)
            self.poutput(json.dumps(report, indent=2, sort_keys=True))
            return EXIT_OK
        self._execute(action)

    @with_argparser(benchmark_id_parser)
    def do_benchmark_id(self, args):
        """Identification benchmark: gap percentiles and accuracy per tau."""
        def action() -> int:
            self._quiet(args)
            report = benchmark_id(args.graphs, args.trials, args.n, train_config(args), args.tau,
                                  args.repeats, None if args.no_widen else args.widen,
                                  args.out, self.logger)
            self.poutput(summary_frame(report).to_string(index=False))
            return EXIT_OK
        self._execute(action)

    @with_argparser(benchmark_est_parser)
    def do_benchmark_est(self, args):
        """Estimation benchmark: KL and ATE error per method and sample size."""
        def action() -> int:
            self._quiet(args)
            report = benchmark_est(args.graphs, args.samples, args.trials, train_config(args),
                                   None if args.no_widen else args.widen, args.out, self.logger)
            self.poutput(summary_frame(report).to_string(index=False))
            return EXIT_OK
        self._execute(action)

    @with_argparser(report_parser)
    def do_report(self, args):
        """Print the summary of a saved report."""
        def action() -> int:
            report = ExperimentReport.load(args.path)
            self.poutput(f"{report.kind}: {len(report.records)} trials, config {report.config_hash}")
            self.poutput(summary_frame(report).to_string(index=False))
            if args.out:
                for path in write_outputs(report, args.out, self.logger):
                    self.poutput(f"Wrote {path}")
            return EXIT_OK
        self._execute(action)

    @with_argparser(show_graph_parser)
    def do_show_graph(self, args):
        """Print a diagram with its topological order and components."""
        def action() -> int:
            graph, bench = resolve_graph(args.graph)
            self.poutput(graph.to_text())
            self.poutput(f"topological order: {' '.join(graph.topological_order())}")
            self.poutput(f"c-components: {[list(c) for c in c_components(graph)]}")
            self.poutput(f"confounded cliques: {[list(c) for c in c2_components(graph)]}")
            if bench is not None:
                label = 'identifiable' if bench.identifiable else 'not identifiable'
                self.poutput(f"benchmark {bench.key}: P({bench.outcome} | do({bench.treatment})) {label}")
            return EXIT_OK
        self._execute(action)

    def do_logs(self, _):
        """Show logged operations of this session."""
        for entry in self.logger.get_logs():
            self.poutput(entry)

    def do_exit(self, _):
        """Exit the shell."""
        self.poutput("Goodbye!")
        return True
