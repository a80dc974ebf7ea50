"""Rule-based sentence segmentation, word tokenization, and NP chunking.

No tagger or parser is available in this environment, so chunking is a
closed-list heuristic: maximal runs of tokens that are not function words,
verbs, or punctuation form noun phrases, with a directly preceding
determiner attached.  Good enough for short declarative sentences; chunk
behavior is frozen by fixtures in the tests.
"""

from __future__ import annotations

import re

_SENTENCE_END = re.compile(r"(?<=[.!?])\s+")
_TOKEN = re.compile(r"\w+(?:[-'’]\w+)*|[^\w\s]", re.UNICODE)

DETERMINERS = frozenset(
    "a an the this that these those my your his her its our their".split()
)

_PRONOUNS = frozenset(
    """
    i me we us you he him she it they them himself herself itself themselves
    who whom whose which what there
    """.split()
)

_FUNCTION_WORDS = frozenset(
    """
    and or but nor so yet if while although though because since when where
    after before until unless whether that as than
    of in on at by for with from to into onto over under between among
    about against during through across behind beyond near without within
    up down off out not no nor never also too very
    am is are was were be been being do does did done doing have has had
    having will would shall should may might must can could ought
    's 'd 'll 'm 're 've n't
    """.split()
)

_BASE_VERBS = """
    say go get make know think take see come want look use find give tell
    work call try ask need feel become leave put mean keep let begin seem
    help talk turn start show hear play run move like live believe hold
    bring happen write sit stand lose pay meet include continue set learn
    change lead understand watch follow stop create speak read allow add
    spend grow open walk win offer remember love consider appear buy wait
    serve die send expect build stay fall cut reach kill remain suggest
    raise pass sell require report decide pull return explain hope develop
    carry break receive agree support hit produce eat cover catch draw
    choose cause point listen realize place close involve contain visit
    award establish found marry elect bear name locate situate direct star
    record release publish perform sing act study teach attend graduate
    join move retire announce sign travel ship award
""".split()


def _inflections(verb: str) -> set[str]:
    forms = {verb}
    if verb.endswith("e"):
        forms.add(verb + "s")
        forms.add(verb[:-1] + "ing")
        forms.add(verb + "d")
    elif verb.endswith("y") and len(verb) > 2 and verb[-2] not in "aeiou":
        forms.add(verb[:-1] + "ies")
        forms.add(verb + "ing")
        forms.add(verb[:-1] + "ied")
    else:
        forms.add(verb + "s")
        forms.add(verb + "ing")
        forms.add(verb + "ed")
        if len(verb) >= 3 and verb[-1] not in "aeiouwxy" and verb[-2] in "aeiou" and verb[-3] not in "aeiou":
            forms.add(verb + verb[-1] + "ing")
            forms.add(verb + verb[-1] + "ed")
    return forms


_VERB_FORMS = frozenset(
    form for verb in _BASE_VERBS for form in _inflections(verb)
) | frozenset(
    "born went gone wrote written said told took taken saw seen came knew "
    "known made found thought gave given got gotten held kept left met paid "
    "ran sat stood won lost sold sent spent built bought brought caught "
    "chose chosen drew drawn fell fallen felt heard hit led lay lain grew "
    "grown broke broken spoke spoken read understood begat died married "
    "elected awarded established located".split()
)


def split_sentences(text: str) -> list[str]:
    sentences = []
    for block in text.splitlines():
        block = block.strip()
        if not block:
            continue
        for part in _SENTENCE_END.split(block):
            part = part.strip()
            if part:
                sentences.append(part)
    return sentences


def tokenize_words(sentence: str) -> list[str]:
    return _TOKEN.findall(sentence)


def _is_breaker(token: str) -> bool:
    lowered = token.casefold()
    if not any(ch.isalnum() for ch in token):
        return True  # punctuation
    if lowered in DETERMINERS:
        return False
    return (
        lowered in _FUNCTION_WORDS
        or lowered in _PRONOUNS
        or lowered in _VERB_FORMS
    )


def chunk_noun_phrases(words: list[str]) -> list[tuple[int, int]]:
    """Word spans [start, end) of heuristic noun phrases, sorted, disjoint."""
    chunks = []
    i = 0
    n = len(words)
    while i < n:
        if _is_breaker(words[i]):
            i += 1
            continue
        start = i
        while i < n and not _is_breaker(words[i]):
            i += 1
        # a lone determiner is not a noun phrase
        span = [w.casefold() for w in words[start:i]]
        if all(w in DETERMINERS for w in span):
            continue
        chunks.append((start, i))
    return chunks
