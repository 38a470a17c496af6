"""fidfigures render <fig1|fig2|fig3|fig4> <payload_dir> <out_image>"""

from __future__ import annotations

import argparse
import json
import sys

from .render import FIGURE_IDS, PayloadError, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="fidfigures",
                                 description="Render figures from sampling payloads.")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure")
    p.add_argument("figure_id", choices=FIGURE_IDS)
    p.add_argument("payload_dir")
    p.add_argument("out_image")
    args = ap.parse_args(argv)
    try:
        meta = render(args.figure_id, args.payload_dir, args.out_image)
    except PayloadError as exc:
        print(json.dumps({"error": "PayloadError", "message": str(exc)}))
        return 2
    print(json.dumps(meta))
    return 0


if __name__ == "__main__":
    sys.exit(main())
