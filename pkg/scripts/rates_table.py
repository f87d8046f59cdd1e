"""Print the default optimal-rate table as CSV."""

import csv
import sys

from samplinglab.cli import RATES_HEADER, LabConfig, rates_table

if __name__ == "__main__":
    w = csv.writer(sys.stdout)
    w.writerow(RATES_HEADER)
    w.writerows(rates_table(LabConfig()))
