from nsdde.cli.config import RunConfig
from nsdde.cli.csv_writer import CsvOutputs, format_value
from nsdde.cli.main import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, build_parser, parse_config, run

__all__ = [
    "EXIT_OK",
    "EXIT_RUNTIME",
    "EXIT_VALIDATION",
    "CsvOutputs",
    "RunConfig",
    "build_parser",
    "format_value",
    "parse_config",
    "run",
]
