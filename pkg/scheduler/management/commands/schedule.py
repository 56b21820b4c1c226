"""
Plan the per-node task schedule and check every downlink deadline.

Usage:
    python manage.py schedule --preset lte
    python manage.py schedule --preset lte --tinv 60e-6          # exits 1
    python manage.py schedule --preset tiny --tree --granularity task

N_OPS_hat is dimensioned from the configured T_inv unless --n-ops-hat is
given; --tinv then sets the inversion time the schedule actually sees.
"""

from dimensioning.services.complexity_service import UnmeetableDeadline, required_ops_hat
from scheduler.models import Granularity
from scheduler.serializers import DeadlineVerdictSerializer, ScheduleSerializer, TreeScheduleSerializer
from scheduler.services.schedule_service import (
    build_node_schedule,
    check_deadlines,
    schedule_csv,
    skew_schedules,
    verdicts_csv,
)
from system.management.base import MimoCommand
from system.services.topology_service import build_tree, hop_count


class Command(MimoCommand):
    help = 'Build the task schedule and check downlink deadlines'
    subcommand = 'schedule'

    def add_command_arguments(self, parser):
        parser.add_argument('--n-ops-hat', dest='n_ops_hat', type=int, help='Operations per sample per node')
        parser.add_argument('--n-ul-pb', dest='n_ul_pb', type=int,
                            help='Uplink symbols processed before the downlink burst')
        parser.add_argument('--granularity', choices=Granularity.values, default=Granularity.VALUE,
                            help='Accumulation pipelining across the tree (default value)')
        parser.add_argument('--tree', action='store_true', help='Schedule every node of the tree')

    def run(self, run_config, params, options):
        n_hops = hop_count(params)
        n_hat = options.get('n_ops_hat')
        if n_hat is None:
            try:
                n_hat = required_ops_hat(params, n_hops)
            except UnmeetableDeadline as exc:
                self.fail(f'{exc} (symbol {exc.symbol})')

        schedule = build_node_schedule(
            params, n_hat,
            n_ul_pb=options.get('n_ul_pb'),
            t_inv=run_config.t_inv,
            granularity=options['granularity'],
            n_hops=n_hops,
        )
        if options.get('tree'):
            result = skew_schedules(schedule, build_tree(params.M, params.tree_arity))
            schedules = list(result)
            json_data = TreeScheduleSerializer(result).data
        else:
            result = schedule
            schedules = [schedule]
            json_data = ScheduleSerializer(schedule).data

        verdicts = check_deadlines(schedules, params)
        self.write_artifact(run_config, 'deadlines.csv', verdicts_csv(verdicts))
        csv_text = schedule_csv(schedules)
        self.write_artifact(run_config, 'schedule.csv', csv_text)

        lines = [
            f'N_OPS_hat: {n_hat}',
            f'N_UL_PB: {schedule.n_ul_pb}',
            f'T_inv_s: {schedule.t_inv!r}',
            f'utilization: {schedule.utilization:.6f}',
            f'backlog_ok: {"yes" if all(s.backlog_ok for s in schedules) else "no"}',
        ]
        for v in verdicts:
            lines.append(f'DL{v.symbol}: completion_s={v.completion!r} deadline_s={v.deadline!r} '
                         f'slack_s={v.slack!r} {"met" if v.met else "MISSED"}')
        json_data = {'schedule': json_data, 'deadlines': DeadlineVerdictSerializer(verdicts, many=True).data}
        self.emit(run_config, 'schedule', text='\n'.join(lines) + '\n', csv_text=csv_text, json_data=json_data)

        if not result.feasible:
            missed = [str(v.symbol) for v in verdicts if not v.met]
            detail = f'downlink symbols {", ".join(missed)} miss their deadline' if missed else 'uplink backlog overruns'
            self.fail(f'Schedule infeasible at N_OPS_hat={n_hat}: {detail}.')
