#!/usr/bin/env python3
"""Run one honest ten-voter election end to end and print the graded report."""

import sys
from pathlib import Path

from blindvote.scenario import ScenarioConfig, VoterSpec, run_scenario


def main() -> int:
    config = ScenarioConfig(
        st=10,
        ct=20,
        et=30,
        voters=[
            VoterSpec(name=f"voter{i}", ballot="ALPHA" if i < 6 else "BETA")
            for i in range(10)
        ],
        seed=42,
    )
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("runs/demo")
    report = run_scenario(config, out_dir=out_dir)

    print(f"{'property':24s} {'expected':14s} {'observed':14s} verdict")
    for row in report.assertions:
        print(
            f"{row.prop:24s} {row.expected:14s} {row.observed:14s} "
            f"{'ok' if row.ok else 'FAIL'}"
        )
    print("\ntally:")
    for ballot_hex, count in report.tally_hex.items():
        print(f"  {bytes.fromhex(ballot_hex).decode():12s} {count}")
    print(f"\ntranscript: {report.transcript_path} ({report.tx_count} transactions)")
    print(f"report:     {report.report_path}")
    return 0 if report.all_ok() else 1


if __name__ == "__main__":
    sys.exit(main())
