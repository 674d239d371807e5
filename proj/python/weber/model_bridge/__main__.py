import argparse
import sys

from .bridge import extract_activations, run_patched, run_trials
from .formats import FormatError, PatchPlan, load_probe_prompts, read_jsonl, write_jsonl, write_wbract


def main(argv=None):
    ap = argparse.ArgumentParser(prog="python -m weber.model_bridge")
    sub = ap.add_subparsers(dest="cmd", required=True)

    ex = sub.add_parser("bridge-extract", help="hidden states for a probe set")
    ex.add_argument("probes")
    ex.add_argument("--model", required=True)
    ex.add_argument("--out", required=True)

    tr = sub.add_parser("bridge-trials", help="forced-choice trials for comparison pairs")
    tr.add_argument("pairs")
    tr.add_argument("--model", required=True)
    tr.add_argument("--out", required=True)

    pa = sub.add_parser("bridge-patch", help="execute a patch plan")
    pa.add_argument("plan")
    pa.add_argument("prompts", help="JSONL with prompt_id, prompt and magnitude_char_span")
    pa.add_argument("--model", required=True)
    pa.add_argument("--out", required=True)

    for p in (ex, tr, pa):
        p.add_argument("--device", default="cpu")

    args = ap.parse_args(argv)
    try:
        if args.cmd == "bridge-patch":
            plan = PatchPlan.read(args.plan)
            prompts = {str(r["prompt_id"]): r for r in read_jsonl(args.prompts)}
        elif args.cmd == "bridge-extract":
            probes = load_probe_prompts(args.probes)
        else:
            pairs = read_jsonl(args.pairs, kind="comparison_pairs")

        from .hf import HFBackend

        backend = HFBackend(args.model, device=args.device)
        if args.cmd == "bridge-extract":
            write_wbract(args.out, *extract_activations(backend, probes))
        elif args.cmd == "bridge-trials":
            write_jsonl(args.out, run_trials(backend, pairs))
        else:
            write_jsonl(args.out, run_patched(backend, plan, prompts))
    except FormatError as e:
        print(f"bridge: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
