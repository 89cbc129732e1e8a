"""Runs an original function and slices of it on random inputs and compares
the values of the target line's referenced names at every hit of the target.

Input (JSON file given as argv[1]):
  {"original": path, "function": name, "seed": int, "runs": int,
   "cases": [{"slice": path, "orig_line": n, "slice_line": m, "names": [...]}]}
Output (stdout, JSON): {"checked": n, "reached": n, "mismatches": [...]}
"""

import inspect
import json
import random
import sys

MAX_HITS = 50
MAX_EVENTS = 20000


class StepLimit(Exception):
    pass


def load(path):
    with open(path) as fh:
        source = fh.read()
    namespace = {"__name__": "subject"}
    exec(compile(source, path, "exec"), namespace)
    return namespace


def observe(fn, args, path, line, names):
    hits = []
    events = [0]

    def local(frame, event, arg):
        if event == "line" and frame.f_code.co_filename == path:
            events[0] += 1
            if events[0] > MAX_EVENTS:
                raise StepLimit()
            if frame.f_lineno == line and len(hits) < MAX_HITS:
                hits.append({n: repr(frame.f_locals[n]) for n in names if n in frame.f_locals})
        return local

    def global_trace(frame, event, arg):
        return local if frame.f_code.co_filename == path else None

    sys.settrace(global_trace)
    failed = None
    try:
        fn(*[list(a) if isinstance(a, list) else a for a in args])
    except StepLimit:
        failed = "step-limit"
    except Exception as exc:  # the subject may raise on some inputs
        failed = type(exc).__name__
    finally:
        sys.settrace(None)
    return hits, failed


def random_args(params, rng):
    args = []
    for p in params:
        if p in ("xs", "arr"):
            args.append([rng.randint(-2, 9) for _ in range(rng.randint(1, 6))])
        else:
            args.append(rng.randint(-3, 9))
    return args


def main():
    with open(sys.argv[1]) as fh:
        job = json.load(fh)
    rng = random.Random(job["seed"])
    original = load(job["original"])[job["function"]]
    params = list(inspect.signature(original).parameters)
    inputs = [random_args(params, rng) for _ in range(job["runs"])]

    checked = reached = 0
    mismatches = []
    for case in job["cases"]:
        sliced = load(case["slice"])[job["function"]]
        for args in inputs:
            checked += 1
            want, want_err = observe(original, args, job["original"], case["orig_line"], case["names"])
            if not want:
                continue
            reached += 1
            got, got_err = observe(sliced, args, case["slice"], case["slice_line"], case["names"])
            if want_err is not None:
                got = got[: len(want)]  # the original stopped early; compare the common prefix
            if got != want:
                mismatches.append({"line": case["orig_line"], "args": args, "want": want[:3], "got": got[:3],
                                   "slice_error": got_err})
    json.dump({"checked": checked, "reached": reached, "mismatches": mismatches[:20]}, sys.stdout)


if __name__ == "__main__":
    main()
