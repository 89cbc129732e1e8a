import math

SCALE = 3


class Stats:
    def __init__(self):
        self.items = {}

    def __repr__(self):
        return "Stats(" + repr(sorted(self.items.items())) + ")"


def tally(xs, d):
    counts = {}
    stats = Stats()
    best = None
    for x in xs:
        counts[x] = counts.get(x, 0) + 1
        stats.items[x] = x * SCALE
        if best is None or counts[x] > counts[best]:
            best = x
    spread = 0
    if xs:
        spread = max(xs) - min(xs)
    ratio = math.floor(spread / (d + 1)) if d >= 0 else 0
    flag = ratio > 2 and best is not None
    if flag:
        ratio, spread = spread, ratio
    result = (best, ratio, len(stats.items))
    return result
