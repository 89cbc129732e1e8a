"""Regenerates the frozen trace fixtures under tests/fixtures/*/traces.

Each fixture test calls one subject function with the listed arguments; the
recorded document follows the schema-v1 trace format (post-state bindings of
the names appearing on each line). Run from the repository root:

    python3 tests/fixtures/make_traces.py
"""

import io
import json
import os
import sys
import tokenize

HERE = os.path.dirname(os.path.abspath(__file__))

# name -> (subject file relative to HERE, subject path written into events, function, calls, outcome)
FIXTURES = {
    "fig1": ("fig1/evaluate.py", "evaluate.py", "evaluate_sequence", {
        "test_weaver_seed_small_lists": [([2, 1],), ([1, 3],)],
        "test_weaver_seed_four_elements": [([60, 5, 8, 2],), ([1, 2, 3, 5],), ([5, 5, 5, 2],)],
        "test_weaver_zero_in_frequencies": [([0, 5, 0, 5],)],
        "test_weaver_pair_of_sevens": [([7, 7],)],
        "test_weaver_low_frequency_unsorted": [([2, 1, 1, 3],)],
        "test_weaver_mixed_values": [([5, 10, 15, 20],)],
        "test_weaver_short_list": [([1, 2, 3],)],
        "test_weaver_ends_in_five": [([1, 2, 3, 5],)],
        "test_weaver_repeated_fives": [([5, 5, 5, 2],)],
    }),
    # Module-level fragment; the call's dict provides the free names a and b.
    "inline": ("inline/fragment.py", "fragment.py", None, {
        "test_fragment_small_sum": [{"a": 2, "b": 3}],
    }),
}


def line_names(source_lines):
    names = {}
    for i, text in enumerate(source_lines, start=1):
        found = []
        try:
            for tok in tokenize.generate_tokens(io.StringIO(text.strip() + "\n").readline):
                if tok.type == tokenize.NAME and tok.string not in found:
                    found.append(tok.string)
        except (tokenize.TokenError, IndentationError):
            pass
        names[i] = found
    return names


def render(value):
    text = repr(value)
    return text if len(text) <= 60 else text[:60] + "…"


def record(path, event_file, function, calls):
    with open(path) as fh:
        source = fh.read()
    names = line_names(source.splitlines())
    code = compile(source, path, "exec")
    if function is None:
        traced = code

        def fn(bindings):
            exec(code, {"__name__": "subject", **bindings})
    else:
        namespace = {"__name__": "subject"}
        exec(code, namespace)
        fn = namespace[function]
        traced = fn.__code__

    events = []
    pending = []  # event waiting for its post-state

    def finish(frame):
        if pending:
            ev = pending.pop()
            ev["vars"] = {n: render(frame.f_locals[n]) for n in names[ev["line"]] if n in frame.f_locals}
            events.append(ev)

    def local(frame, event, arg):
        if event == "line":
            finish(frame)
            pending.append({"k": len(events) + 1, "file": event_file, "line": frame.f_lineno})
        elif event == "return":
            finish(frame)
        return local

    def tracer(frame, event, arg):
        # Only the subject's own frame; comprehension frames are not separate lines.
        return local if frame.f_code is traced else None

    sys.settrace(tracer)
    try:
        for args in calls:
            if isinstance(args, dict):
                fn(args)
            else:
                fn(*[list(a) if isinstance(a, list) else a for a in args])
    finally:
        sys.settrace(None)
    for i, ev in enumerate(events, start=1):
        ev["k"] = i
    return events


def main():
    for fixture, (subject, event_file, function, tests) in FIXTURES.items():
        out_dir = os.path.join(HERE, fixture, "traces")
        os.makedirs(out_dir, exist_ok=True)
        for test_id, calls in tests.items():
            events = record(os.path.join(HERE, subject), event_file, function, calls)
            doc = {"v": 1, "test_id": test_id, "outcome": {"status": "passed", "message": ""}, "events": events}
            with open(os.path.join(out_dir, test_id + ".json"), "w") as fh:
                json.dump(doc, fh, indent=1, ensure_ascii=False)
                fh.write("\n")


if __name__ == "__main__":
    main()
