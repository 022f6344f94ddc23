# main.py - shiftthermo command-line entry point
# ======================================================================================
#  THERMODYNAMIC FORMALISM ON FULL SHIFTS WITH FINITE-MEMORY POTENTIALS
# ======================================================================================
# Every subcommand reads JSON input files, computes exactly on finite tables and writes
# a JSON or CSV report. Routing lives in app/cli.py; numeric defaults in
# config/settings.py; the catalog of checked identities in config/checks.py.
#
# Usage:
#     python main.py pressure --potential zero.json
#     python main.py second-law --jacobian uniform.json --measure bern09.json
#     python main.py verify-all --seed 42 --out suite.json
# ======================================================================================

# --- Core & Third-Party Imports ---
import sys

from app.cli import run

if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
