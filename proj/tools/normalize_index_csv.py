#!/usr/bin/env python3
"""Convert a daily OHLC export (Yahoo, Wind, ...) into the date,open,high,low,close
layout read by `lppl`. Extra columns are ignored, header matching is case-insensitive.
Rows with missing or non-positive prices are dropped and reported on stderr."""

import argparse
import csv
import datetime as dt
import sys

COLUMNS = ("date", "open", "high", "low", "close")


def parse_date(text):
    for fmt in ("%Y-%m-%d", "%Y/%m/%d", "%Y%m%d", "%m/%d/%Y"):
        try:
            return dt.datetime.strptime(text.strip(), fmt).date()
        except ValueError:
            pass
    raise ValueError(f"unrecognised date {text!r}")


def normalize(rows):
    bars, dropped = {}, 0
    for row in rows:
        try:
            day = parse_date(row["date"])
            prices = [float(row[c]) for c in COLUMNS[1:]]
        except (KeyError, ValueError, TypeError):
            dropped += 1
            continue
        if any(not p > 0 for p in prices):
            dropped += 1
            continue
        bars[day] = prices
    return sorted(bars.items()), dropped


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("input")
    ap.add_argument("output", nargs="?", default="-")
    ap.add_argument("--from", dest="start", type=parse_date)
    ap.add_argument("--to", dest="end", type=parse_date)
    args = ap.parse_args()

    with open(args.input, newline="", encoding="utf-8-sig") as f:
        reader = csv.DictReader(f)
        lower = {name: name.strip().lower() for name in reader.fieldnames or []}
        missing = [c for c in COLUMNS if c not in lower.values()]
        if missing:
            sys.exit(f"{args.input}: missing columns {', '.join(missing)}")
        rows = ({lower[k]: v for k, v in r.items() if k in lower} for r in reader)
        bars, dropped = normalize(rows)

    bars = [(d, p) for d, p in bars if (args.start is None or d >= args.start) and (args.end is None or d <= args.end)]
    if not bars:
        sys.exit("no usable rows")
    out = sys.stdout if args.output == "-" else open(args.output, "w", newline="")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(COLUMNS)
    for day, prices in bars:
        w.writerow([day.isoformat(), *(repr(p) for p in prices)])
    if out is not sys.stdout:
        out.close()
    if dropped:
        print(f"dropped {dropped} rows", file=sys.stderr)
    print(f"{len(bars)} bars {bars[0][0]} .. {bars[-1][0]}", file=sys.stderr)


if __name__ == "__main__":
    main()
