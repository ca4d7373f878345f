#
# Copyright (C) 2022 Intel Corporation
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
import json
import logging
import sys
from typing import Any, Callable, Dict

import configargparse

from loopchi import __version__
from loopchi.config import RunConfig, build_cli_parser, run_config_from_args
from loopchi.exceptions import (
    DegenerateDenominator,
    InconclusiveAdjudication,
    InvalidParameters,
    PanelFailure,
    ParseError,
    ProfileHasGaps,
    RequiresMetastable,
    ValidationError,
)
from loopchi.log import get_logger_adapter, initial_root_logger_setup
from loopchi.repro import cmd_adjudicate, cmd_chi, cmd_group_index, cmd_localize, cmd_repro
from loopchi.usage_loggers import NoopUsageLogger, ProcessUsageLogger, UsageLoggerInterface

logger = get_logger_adapter("loopchi.main")


def parse_cmd_args() -> configargparse.Namespace:
    return build_cli_parser().parse_args()


def _run_adjudicate(args: configargparse.Namespace, config: RunConfig, usage_logger: UsageLoggerInterface) -> None:
    report = cmd_adjudicate(config, usage_logger)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))


SUBCOMMANDS: Dict[str, Callable[[configargparse.Namespace, RunConfig, UsageLoggerInterface], Any]] = {
    "chi": lambda args, config, usage_logger: cmd_chi(config, usage_logger),
    "group-index": lambda args, config, usage_logger: cmd_group_index(config, usage_logger),
    "localize": lambda args, config, usage_logger: cmd_localize(config, usage_logger),
    "repro": lambda args, config, usage_logger: cmd_repro(args.figure, config, usage_logger),
    "adjudicate": _run_adjudicate,
}


def main() -> None:
    args = parse_cmd_args()

    global logger
    logger = initial_root_logger_setup(
        logging.DEBUG if args.verbose else logging.INFO,
        args.log_file,
        args.log_rotate_max_size,
        args.log_rotate_backup_count,
    )

    usage_logger = ProcessUsageLogger(logger) if args.log_usage else NoopUsageLogger()

    try:
        config = run_config_from_args(args)
        logger.info(
            "Running loopchi", version=__version__, commandline=" ".join(sys.argv[1:]), subcommand=args.subcommand
        )
        SUBCOMMANDS[args.subcommand](args, config, usage_logger)
    except KeyboardInterrupt:
        pass
    except (ParseError, ValidationError, InvalidParameters) as e:
        logger.error(f"Invalid configuration: {e}")
        sys.exit(1)
    except InconclusiveAdjudication as e:
        print(json.dumps(e.report, indent=2, sort_keys=True))
        logger.error(f"Adjudication inconclusive: {e}")
        sys.exit(1)
    except PanelFailure as e:
        logger.error(f"Reproduction aborted, partial manifest written: {e}")
        sys.exit(1)
    except (RequiresMetastable, ProfileHasGaps, DegenerateDenominator) as e:
        logger.error(str(e))
        sys.exit(1)
    except OSError as e:
        logger.error(f"Output error: {e}")
        sys.exit(1)
    except Exception:
        logger.exception("Unexpected error occurred")
        sys.exit(1)

    usage_logger.log_run()


if __name__ == "__main__":
    main()
