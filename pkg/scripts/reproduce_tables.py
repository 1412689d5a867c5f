#!/usr/bin/env python3
"""Print the limiting-configuration tables for symmetric interaction.

For small rings the configurations are listed up to rotation (starred entries
are unreachable from the empty start); for larger rings only the four counts
are shown.
"""
import argparse

from nqsim.limits import enumerate_limits, rotation_classes, summary_counts


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--list-max", type=int, default=10, help="list configurations up to this M")
    ap.add_argument("--count-max", type=int, default=16, help="count configurations up to this M")
    args = ap.parse_args()

    print(f"{'M':>3}  configurations up to rotation (* = not reachable from empty)")
    for m in range(4, args.list_max + 1):
        configs = enumerate_limits(m)
        classes = rotation_classes(configs)
        rendered = []
        for cls in sorted(classes, key=lambda k: not k.representative.achievable_from_empty):
            star = "" if cls.representative.achievable_from_empty else "*"
            rendered.append(f"{cls.representative.label}{star} x{cls.orbit_size}")
        counts = summary_counts(configs)
        print(f"{m:>3}  {';  '.join(rendered)}")
        print(f"     -> {counts['all_from_empty']} sequences from empty ({counts['all_total']} total)")

    print()
    print(f"{'M':>3} {'classes':>12} {'sequences':>14}")
    for m in range(args.list_max + 1, args.count_max + 1):
        c = summary_counts(enumerate_limits(m))
        print(
            f"{m:>3} {c['classes_from_empty']:>5}({c['classes_total']}*)"
            f" {c['all_from_empty']:>8}({c['all_total']}*)"
        )


if __name__ == "__main__":
    main()
