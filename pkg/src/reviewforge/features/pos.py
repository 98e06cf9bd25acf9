"""Lightweight lexicon + suffix-rule part-of-speech tagger.

Tags come from the 17 coarse universal tags. Closed-class words and common
review vocabulary are looked up directly; unknown words fall through an
ordered suffix table and default to NOUN.
"""

import string

from ..utils import check_tokens

TAGSET = (
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
)

_WORDS = {
    "PRON": """i me my mine myself we us our ours ourselves you your yours yourself
        he him his himself she her hers herself it its itself they them their theirs
        themselves who whom whose what everyone everything someone something anyone
        anything nobody nothing everybody somebody one u""",
    "DET": """a an the this that these those some any each every no another all both
        either neither few several much many such""",
    "ADP": """in on at by for with about against between into through during before
        after above below to from up down of off over under around near across along
        behind beside via per without within""",
    "CCONJ": "and but or nor yet plus",
    "SCONJ": "because although though while if unless until since whereas whether than as so",
    "AUX": """is am are was were be been being have has had having do does did will
        would shall should can could may might must isn aren wasn weren don doesn
        didn won wouldn shouldn can couldn haven hasn hadn ain ll ve re d m""",
    "PART": "not n't t s 's to",
    "ADV": """very really too also just so quite pretty always never often sometimes
        usually again still even here there now then soon already definitely
        absolutely super extremely highly totally well back only almost ever
        away out maybe probably how when where why""",
    "INTJ": "wow oh yes yeah ok okay hey yum yummy omg lol please thanks ugh meh",
    "ADJ": """good great best better nice amazing awesome delicious fresh friendly
        bad worst worse terrible horrible awful cold hot small big large little
        new old happy sure fast slow rude clean dirty tasty perfect excellent
        decent fine okay sweet spicy salty dry busy cheap expensive pricey
        authentic favorite fantastic wonderful huge tiny attentive polite nasty
        bland cozy loud quiet full empty overall average mediocre solid real
        other same next last first second whole right wrong fun helpful
        reasonable incredible outstanding disappointing crispy juicy tender""",
    "VERB": """go went gone get got come came eat ate eaten love loved like liked
        try tried want wanted order ordered recommend recommended say said think
        thought know knew see saw make made take took give gave find found
        wait waited tell told feel felt let keep kept leave left need needed
        return returned enjoy enjoyed serve served seemed seem looked look
        asked ask visited visit stopped stop brought bring came had""",
}

LEXICON = {}
for _tag, _words in _WORDS.items():
    for _w in _words.split():
        LEXICON.setdefault(_w, _tag)

# ordered; first matching suffix wins
SUFFIX_RULES = (
    ("ing", "VERB"),
    ("ed", "VERB"),
    ("ly", "ADV"),
    ("ous", "ADJ"),
    ("ful", "ADJ"),
    ("able", "ADJ"),
    ("ible", "ADJ"),
    ("ive", "ADJ"),
    ("ic", "ADJ"),
    ("est", "ADJ"),
    ("ish", "ADJ"),
    ("less", "ADJ"),
    ("tion", "NOUN"),
    ("sion", "NOUN"),
    ("ness", "NOUN"),
    ("ment", "NOUN"),
    ("ity", "NOUN"),
    ("er", "NOUN"),
    ("ize", "VERB"),
    ("ise", "VERB"),
    ("ate", "VERB"),
)

_SYMBOLS = frozenset("$%&*+<=>@^|~#/\\")
_PUNCT = frozenset(string.punctuation) - _SYMBOLS


def tag_token(token):
    if not token:
        return "X"
    if all(ch in _PUNCT for ch in token):
        return "PUNCT"
    if all(ch in _SYMBOLS for ch in token):
        return "SYM"
    if any(ch.isdigit() for ch in token) and all(ch.isdigit() or ch in ".,:" for ch in token):
        return "NUM"
    low = token.lower()
    if low in LEXICON:
        return LEXICON[low]
    if not any(ch.isalpha() for ch in token):
        return "X"
    if token[0].isupper():
        return "PROPN"
    if len(low) > 3:
        for suffix, tag in SUFFIX_RULES:
            if low.endswith(suffix):
                return tag
    return "NOUN"


def pos_tag(tokens):
    """Coarse tag for every token, one-to-one."""
    return [tag_token(tok) for tok in check_tokens(tokens)]
