"""The two-parameter benchmark as a line-protocol executable.

Reads ``d_1 d_2 theta`` per line, prints the two constraint values.
Optional arguments override the CQA band: ``illustrative_model.py LO HI``.
"""
import sys


def main(argv):
    lo, hi = (float(argv[1]), float(argv[2])) if len(argv) == 3 else (0.20, 0.75)
    for line in sys.stdin:
        d1, d2, theta = (float(x) for x in line.split())
        s = theta * d1 * d1 + d2
        sys.stdout.write(f"{lo - s!r} {s - hi!r}\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main(sys.argv)
