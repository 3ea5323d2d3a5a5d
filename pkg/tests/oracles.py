"""Reference implementations written straight from the metric definitions.

They favour obviousness over speed and share no code with the package.
"""

from fractions import Fraction


def jaro_bruteforce(s: str, t: str) -> Fraction:
    """Jaro similarity with exact rational arithmetic.

    Characters s[i] and t[j] match when equal, |i - j| <= floor(max(|s|, |t|) / 2) - 1,
    and t[j] was not claimed by an earlier character of s (scanning s left to
    right, each taking the leftmost free partner). Transpositions are half the
    number of positions where the two matched subsequences disagree.
    """
    if s == t:
        return Fraction(1)
    if not s or not t:
        return Fraction(0)
    reach = max(len(s), len(t)) // 2 - 1
    if reach < 0:
        reach = 0
    claimed = set()
    pairs = []
    for i in range(len(s)):
        partners = [j for j in range(len(t)) if abs(i - j) <= reach and s[i] == t[j] and j not in claimed]
        if partners:
            j = min(partners)
            claimed.add(j)
            pairs.append((i, j))
    m = len(pairs)
    if m == 0:
        return Fraction(0)
    from_s = [s[i] for i, _ in pairs]
    from_t = [t[j] for j in sorted(claimed)]
    disagreements = sum(1 for x, y in zip(from_s, from_t) if x != y)
    transpositions = Fraction(disagreements, 2)
    return (Fraction(m, len(s)) + Fraction(m, len(t)) + (m - transpositions) / m) / 3


def network_rule(members: list[dict]) -> tuple[bool, bool]:
    """(candidate, confirmed) for the true identity under the network rule.

    Each member dict carries: self_identified, public, lists_nemo, name_matches.
    The true identity is a candidate when at least one mapped member with a
    public list names it, and confirmed when at least two do.
    """
    votes = sum(
        1 for m in members if m["self_identified"] and m["public"] and m["lists_nemo"] and m["name_matches"]
    )
    return votes >= 1, votes >= 2
