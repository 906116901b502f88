"""
Punto de entrada del pipeline de síntesis DOB basada en FRF.

Uso:
    python app.py identify   --config joint2.env
    python app.py synthesize --config joint2.env [--frf results/frf_joint2.json]
    python app.py verify     --config joint2.env [--result ...] [--frf ...]
    python app.py simulate   --config joint2.env [--result ...]
    python app.py report     results/synthesis_result.json results/metrics.json ...
    python app.py run        --config joint2.env
"""
import sys
import logging
import argparse
from dataclasses import replace
from typing import List, Optional

from cli import commands
from config import Config, RunConfig
from utils.errors import DobError
from utils.logging_config import setup_logging

logger = logging.getLogger("dob-app")

EXIT_OTHER = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dob", description="Síntesis de DOB a partir de FRF")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Archivo de configuración CLAVE=VALOR")
    common.add_argument("--out", help="Directorio de salida (sobrescribe output_dir)")
    common.add_argument("--seed", type=int, help="Semilla del ruido de identificación")
    common.add_argument("--verbose", "-v", action="store_true", help="Logging DEBUG en consola")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("identify", parents=[common], help="Identifica las FRF del banco o de los registros")
    synth = sub.add_parser("synthesize", parents=[common], help="Sintetiza el DOB")
    synth.add_argument("--frf", help="Archivo FRF")
    verify = sub.add_parser("verify", parents=[common], help="Certifica la estabilidad")
    verify.add_argument("--result", help="Resultado de síntesis")
    verify.add_argument("--frf", help="Archivo FRF")
    simulate = sub.add_parser("simulate", parents=[common], help="Simula los escenarios")
    simulate.add_argument("--result", help="Resultado de síntesis")
    report = sub.add_parser("report", parents=[common], help="Genera el resumen")
    report.add_argument("artifacts", nargs="*", help="Artefactos JSON/CSV a resumir")
    sub.add_parser("run", parents=[common], help="Pipeline completo")
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.load(args.config) if args.config else RunConfig()
    overrides = {}
    if args.out:
        overrides["output_dir"] = args.out
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        config = replace(config, **overrides)
        config.validate()
    return config


def dispatch(args: argparse.Namespace, config: RunConfig) -> str:
    if args.command == "identify":
        return ", ".join(commands.cmd_identify(config))
    if args.command == "synthesize":
        return commands.cmd_synthesize(config, args.frf)
    if args.command == "verify":
        return commands.cmd_verify(config, args.result, args.frf)
    if args.command == "simulate":
        return commands.cmd_simulate(config, args.result)
    if args.command == "report":
        return commands.cmd_report(config, args.artifacts)
    return commands.cmd_run(config)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Ejecuta un subcomando y devuelve el código de salida
    (0 éxito, 2 configuración, 3 infactible, 4 certificación, 5 divergencia, 1 otros).
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else 0

    setup_logging("DEBUG" if args.verbose else None)
    Config.validate_config()

    try:
        config = load_run_config(args)
        output = dispatch(args, config)
    except DobError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.error(f"Error inesperado: {e}", exc_info=True)
        return EXIT_OTHER

    logger.info(f"Comando '{args.command}' completado: {output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
