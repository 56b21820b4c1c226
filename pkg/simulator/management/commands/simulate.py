"""
Simulate frames over the full tree and check them against the centralized oracle.

Usage:
    python manage.py simulate --preset lte --frames 2 --seed 7
    python manage.py simulate --preset lte --mode cb
    python manage.py simulate --preset lte --tinv 60e-6     # deadline failure, exits 1

Writes simulation.{txt,csv,json}, events.csv, tallies.csv and deadlines.csv.
"""

import csv
import io

from dimensioning.services.complexity_service import UnmeetableDeadline
from scheduler.models import Granularity
from scheduler.services.schedule_service import verdicts_csv
from simulator.serializers import SweepReportSerializer
from simulator.services.engine_service import SingularGramAbort
from simulator.services.frame_service import events_csv, plan_frame, sweep_frames, tallies_csv
from simulator.services.scenario_service import generate_scenario
from system.management.base import MimoCommand

METRIC_COLUMNS = ('frame', 'direction', 'symbol', 'max_abs', 'rel_fro', 'tolerance', 'ok')


class Command(MimoCommand):
    help = 'Run frames through the distributed pipeline and compare with the centralized reference'
    subcommand = 'simulate'

    def add_command_arguments(self, parser):
        parser.add_argument('--n-ops-hat', dest='n_ops_hat', type=int, help='Operations per sample per node')
        parser.add_argument('--n-ul-pb', dest='n_ul_pb', type=int,
                            help='Uplink symbols processed before the downlink burst')
        parser.add_argument('--granularity', choices=Granularity.values, default=Granularity.VALUE,
                            help='Accumulation pipelining across the tree (default value)')

    def run(self, run_config, params, options):
        scenario = generate_scenario(run_config.seed, params)
        try:
            tree = plan_frame(
                scenario,
                n_hat=options.get('n_ops_hat'),
                t_inv=run_config.t_inv,
                n_ul_pb=options.get('n_ul_pb'),
                granularity=options['granularity'],
            )
            report = sweep_frames(scenario, run_config.frames, tree)
        except UnmeetableDeadline as exc:
            self.fail(f'{exc} (symbol {exc.symbol})')
        except SingularGramAbort as exc:
            self.fail(str(exc))

        events = [e for result in report.results for e in result.events]
        self.write_artifact(run_config, 'events.csv', events_csv(events))
        self.write_artifact(run_config, 'tallies.csv', tallies_csv(report.results))
        verdicts = [v for result in report.results for v in result.verdicts]
        self.write_artifact(run_config, 'deadlines.csv', verdicts_csv(verdicts))

        self.emit(
            run_config, 'simulation',
            text=self._summary(tree[0].n_hat, report),
            csv_text=self._metrics_csv(report),
            json_data=SweepReportSerializer(report).data,
        )

        if not report.ok:
            problems = []
            if any(not r.oracle_ok for r in report.results):
                problems.append('oracle mismatch')
            if report.violations:
                problems.append('missed deadlines at (frame, symbol) ' +
                                ', '.join(f'({f}, {s})' for f, s in report.violations))
            if not report.backlog_ok:
                problems.append('uplink backlog overruns the next frame')
            self.fail('Simulation failed: ' + '; '.join(problems) + '.')

    def _summary(self, n_hat: int, report) -> str:
        lines = [f'frames: {report.frames}', f'N_OPS_hat: {n_hat}',
                 f'backlog_ok: {"yes" if report.backlog_ok else "no"}']
        for result in report.results:
            worst = max((m.rel_fro for m in result.metrics if m.direction != 'ifft'), default=0.0)
            totals = {tally.total for tally in result.tallies.values()}
            lines.append(
                f'frame {result.frame}: max_rel_error={worst:.3e} '
                f'deadlines={"met" if result.deadlines_met else "MISSED"} '
                f'peak_buffered={result.peak_buffered} '
                f'ops_per_node={"/".join(str(t) for t in sorted(totals))}'
            )
        return '\n'.join(lines) + '\n'

    def _metrics_csv(self, report) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(METRIC_COLUMNS)
        for result in report.results:
            for m in result.metrics:
                writer.writerow([result.frame, m.direction, m.symbol, repr(m.max_abs), repr(m.rel_fro),
                                 repr(m.tolerance), 'yes' if m.ok else 'no'])
        return buffer.getvalue()
