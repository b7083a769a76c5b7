"""Convert the MASS birthwt table to the units used by the bundled fixture.

usage: python convert_birthwt.py birthwt.csv > birthwt.csv
"""

import csv
import sys

LB_TO_KG = 0.453592


def main(path):
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["age", "lwt", "smoke", "race2", "race3", "bwt"])
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            race = int(row["race"])
            out.writerow([
                int(row["age"]),
                repr(int(row["lwt"]) * LB_TO_KG),
                int(row["smoke"]),
                int(race == 2),
                int(race == 3),
                repr(int(row["bwt"]) / 1000),
            ])


if __name__ == "__main__":
    main(sys.argv[1])
