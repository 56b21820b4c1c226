"""
Shared base for the toolkit's management commands.

Every command accepts the same flags, loads parameters the same way and
writes its artifacts into one output directory:

    python manage.py dimension --preset lte
    python manage.py schedule --config params.env --out runs/a --format csv
"""

import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from rest_framework.renderers import JSONRenderer

from system.models import OutputFormat, RunConfig, SystemParams
from system.services.config_service import ConfigError, MissingConfigFile, load_params, preset, preset_names
from system.services.params_service import validate

logger = logging.getLogger(__name__)

EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


class MimoCommand(BaseCommand):
    subcommand = ''

    def add_arguments(self, parser):
        parser.add_argument('--config', dest='config_path', help='Flat KEY=value parameter file')
        parser.add_argument('--preset', help=f'Embedded parameter set ({", ".join(preset_names())})')
        parser.add_argument('--mode', type=str.lower, choices=['cb', 'zf', 'mmse'], help='Processing mode override')
        parser.add_argument('--seed', type=int, default=0, help='Random seed (default 0)')
        parser.add_argument('--frames', type=int, default=1, help='Frames to simulate')
        parser.add_argument('--tinv', dest='t_inv', type=float, help='Inversion time in seconds')
        parser.add_argument('--out', dest='output_dir', help='Output directory')
        parser.add_argument('--format', dest='output_format', choices=OutputFormat.values,
                            default=OutputFormat.TEXT, help='Output format (default text)')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        run_config = self.build_run_config(options)
        params = self.load_params(run_config)
        self.run(run_config, params, options)

    def run(self, run_config: RunConfig, params: SystemParams, options: dict):
        raise NotImplementedError

    # ── Config ───────────────────────────────────────────────────────────────

    def build_run_config(self, options: dict) -> RunConfig:
        if options.get('frames', 1) < 1:
            raise CommandError('--frames must be >= 1', returncode=EXIT_USAGE)
        if options.get('t_inv') is not None and options['t_inv'] < 0:
            raise CommandError('--tinv must be >= 0', returncode=EXIT_USAGE)

        output_dir = Path(options.get('output_dir') or settings.MIMO_OUTPUT_DIR)
        try:
            output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise CommandError(f'Output directory is not writable: {exc}', returncode=EXIT_USAGE)

        mode = options.get('mode')
        return RunConfig(
            subcommand=self.subcommand,
            config_path=options.get('config_path'),
            preset=options.get('preset'),
            output_dir=str(output_dir),
            seed=options.get('seed') or 0,
            output_format=options.get('output_format') or OutputFormat.TEXT,
            mode=mode.upper() if mode else None,
            frames=options.get('frames') or 1,
            t_inv=options.get('t_inv'),
        )

    def load_params(self, run_config: RunConfig) -> SystemParams:
        if bool(run_config.config_path) == bool(run_config.preset):
            raise CommandError('Give exactly one of --config or --preset.', returncode=EXIT_USAGE)
        try:
            if run_config.config_path:
                params = load_params(run_config.config_path)
            else:
                params = preset(run_config.preset)
        except MissingConfigFile as exc:
            raise CommandError(str(exc), returncode=EXIT_USAGE)
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=EXIT_USAGE)

        if run_config.mode:
            params = params.with_changes(mode=run_config.mode)
            violations = validate(params)
            if violations:
                raise CommandError('; '.join(str(v) for v in violations), returncode=EXIT_USAGE)
        return params

    # ── Output ───────────────────────────────────────────────────────────────

    def write_artifact(self, run_config: RunConfig, name: str, content: str) -> Path:
        path = Path(run_config.output_dir) / name
        path.write_text(content, encoding='utf-8')
        logger.info('Wrote %s', path)
        return path

    def render_json(self, data) -> str:
        return JSONRenderer().render(data, renderer_context={'indent': 2}).decode('utf-8') + '\n'

    def emit(self, run_config: RunConfig, stem: str, text: str, csv_text: str, json_data):
        """Write the main artifact in the selected format and echo it."""
        fmt = run_config.output_format
        if fmt == OutputFormat.CSV:
            content = csv_text
        elif fmt == OutputFormat.JSON:
            content = self.render_json(json_data)
        else:
            content = text
        self.write_artifact(run_config, f'{stem}.{"txt" if fmt == OutputFormat.TEXT else fmt}', content)
        self.stdout.write(content, ending='')

    def fail(self, message: str):
        raise CommandError(message, returncode=EXIT_CHECK_FAILED)
