"""Collapse a model into a single location and compare timed words.

Run:  python3 examples_demo/one_location.py
"""

from fractions import Fraction

from ptasynth.gadgets import accepts_timed_word, one_location_transform, timed_words
from ptasynth.model import parse, render

SRC = """pta zd ; clocks x, y ; parameters p ; actions a, b ;
location l0 { initial ; invariant x <= 2 ; }
location l1 { invariant y <= 1 ; }
location l2 { }
edge l0 -> l1 { sync a ; guard x >= p ; reset y ; }
edge l1 -> l2 { sync b ; guard y = 0 ; }
edge l1 -> l0 { sync a ; guard y = 1 ; reset x ; }
edge l2 -> l0 { sync b ; guard x < 3 ; reset x ; }
"""

m = parse(SRC)
for k in (1, 2, 4):
    t = one_location_transform(m, k)
    words = list(timed_words(["a", "b"], [0, Fraction(1, 2), 1, 2], 4))
    diff = [w for w in words if accepts_timed_word(m, w, {"p": 0}) != accepts_timed_word(t, w, {"p": 0})]
    print(f"k={k}: {len(t.clocks) - len(m.clocks)} extra clocks, {len(t.edges)} edges, "
          f"{len(diff)} of {len(words)} words disagree")

print(render(one_location_transform(m, 1)).splitlines()[0])
