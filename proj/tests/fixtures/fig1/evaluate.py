def evaluate_sequence(arr: list[int]):
    score = 0
    freq = {}
    min_val, max_val = min(arr), max(arr)

    for x in arr:
        freq[x] = freq.get(x, 0) + 1
        score += x
    if len(arr) < 4:
        if arr[0] % 2 == 0:
            score += 4
        else:
            score -= 2
            if arr[-1] == 3:
                score += 10
    elif score % 5 == 0:
        if max_val - min_val > 50:
            score += 5
            if sum(1 for x in arr if x % 2 == 0) > 2:
                score *= 2
        elif 0 in freq:
            score += 7
    else:
        if arr == sorted(arr):
            score += 3
        elif all(v < 3 for v in freq.values()):
            score -= 1 # target line
        else:
            score += 6

    return score
