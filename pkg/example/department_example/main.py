# Adds the local bayplan source code to path, so that version is imported
import os, sys
sys.path.append(os.path.join(os.path.dirname(__file__), "../../"))

import logging

import bayplan
from bayplan.pipeline import format_report, write_report

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    logging.basicConfig(level=logging.INFO)
    scenario = bayplan.ingest(
        os.path.join(HERE, "items.csv"),
        os.path.join(HERE, "pogs.csv"),
        os.path.join(HERE, "scenario.yaml"),
        overrides=sys.argv[1:],  # e.g. weights.similarity=0 total_bays=6.5
    )
    report = bayplan.run_scenario(scenario)
    print(format_report(report))
    write_report(report, os.path.join(HERE, f"{scenario.department_id}_plan.json"))


if __name__ == "__main__":
    main()
