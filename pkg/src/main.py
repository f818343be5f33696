import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from src.api.commands import cmd_density, cmd_diagnose_miso, cmd_evaluate, cmd_sample, cmd_train, cmd_verify
from src.domain.errors import JdanError
from src.infra.logging_setup import configure_logging

logger = logging.getLogger("jdan")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Configuración JSON de la ejecución")
    common.add_argument("--seed", type=int, default=None, help="Sobrescribe la semilla del comando")
    common.add_argument("--out", default=None, help="Ruta de salida principal")
    common.add_argument("--quiet", action="store_true", help="Solo advertencias y errores en el log")

    parser = argparse.ArgumentParser(prog="jdan", description="Pronóstico de densidad conjunta con cópula FGM generalizada")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="Entrena la hiperred desde una configuración")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="Métricas de pronóstico sobre un CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--pit-out", default=None, help="CSV opcional con los valores PIT")
    p.add_argument("--m-samples", type=int, default=200, help="Muestras por par para el energy score")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("density", parents=[common], help="Rejilla de la densidad conjunta")
    p.add_argument("--model", required=True)
    p.add_argument("--x", default=None, help="Features separadas por comas")
    p.add_argument("--grid", type=int, default=64, help="Puntos por dimensión libre")
    p.add_argument("--fix", nargs="*", default=[], help="Dimensiones fijadas d=v (d en base 1)")
    p.set_defaults(handler=cmd_density)

    p = sub.add_parser("sample", parents=[common], help="Muestras de la densidad conjunta")
    p.add_argument("--model", required=True)
    p.add_argument("--x", default=None, help="Features separadas por comas")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("diagnose-miso", parents=[common], help="Busca un contraejemplo en redes MISO de pesos positivos")
    p.add_argument("--activation", required=True)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--hidden", type=int, default=4, help="Unidades por capa oculta")
    p.add_argument("--hidden-layers", type=int, default=1)
    p.set_defaults(handler=cmd_diagnose_miso)

    p = sub.add_parser("verify", parents=[common], help="Batería de invariantes sobre un modelo")
    p.add_argument("--model", required=True)
    p.add_argument("--level", choices=["quick", "full"], default="quick")
    p.add_argument("--contexts", type=int, default=3, help="Contextos x verificados para una hiperred")
    p.set_defaults(handler=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging(quiet=args.quiet)
        return args.handler(args)
    except JdanError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code
    except (FileNotFoundError, ValidationError) as e:
        logger.error("%s", e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
