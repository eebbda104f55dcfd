"""Template-generated synthetic email corpus for desk-scale experiments.

Emails mix task-like sentences (action verb, pronoun anchor or imperative,
no negation) with filler that fails a specific filter, so the weak labeler
produces a well-populated funnel and classifiers have real signal to learn.
Generation is seeded and pure: (n_emails, seed) determines every byte.
"""

from __future__ import annotations

import random
from pathlib import Path

from .corpus import EmailMessage, parse_email

OBJECTS = (
    "report", "proposal", "invoice", "contract", "slides", "budget",
    "summary", "forecast", "agenda", "memo", "spreadsheet", "timeline",
)
NAMES = ("Alex", "Jordan", "Sam", "Taylor", "Morgan", "Casey", "Riley", "Jamie")
DAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "tomorrow")
PLACES = ("Houston", "the lake", "Portland", "the office", "Denver", "the park")

# Pass every filter: action verb, length in bounds, pronoun or imperative
# start, no negation.
ACTIONABLE = (
    "Please send me the {obj} by {day}.",
    "You should review the {obj} before {day}.",
    "Submit the {obj} to {name} by {day}.",
    "We need to finish the {obj} this week.",
    "Could you forward the {obj} to {name} today?",
    "Schedule a call with {name} for {day}.",
    "I will draft the {obj} and send it to {name}.",
    "Check the numbers and update the {obj} for me.",
    "You have to sign the {obj} before the meeting on {day}.",
    "Prepare the {obj} so we can close the deal on {day}.",
    "Confirm the booking with {name} and email me the details.",
    "He asked that you deliver the {obj} to him by {day}.",
)

# No action verb anywhere: first-filter rejections.
NO_VERB = (
    "The weather in {place} was lovely all weekend.",
    "I really enjoyed the dinner with {name} yesterday.",
    "Our team had a great quarter overall.",
    "The {obj} looks wonderful, nice work.",
    "Thanks again for your help on {day}.",
    "It was good to see everyone at lunch.",
    "I like to play the guitar on weekends.",
    "My favorite part of the trip was {place}.",
    "The conference hall seemed bigger than last year.",
    "That restaurant near {place} is always crowded.",
)

# Action verb present but the sentence rambles past the length bound.
TOO_LONG = (
    "When we finally send the {obj} over to the regional office next "
    "quarter there will be a long and careful discussion about every "
    "single line item in the appendix before anyone agrees to move ahead.",
    "If the committee decides to review the {obj} again after the annual "
    "offsite in {place} then the whole schedule for the product launch and "
    "the marketing push will slip by at least another two or three weeks.",
)

# Action verb, length fine, but no pronoun and not imperative-initial.
NO_PRONOUN = (
    "The team sent the {obj} last {day}.",
    "Management approved the budget in record time.",
    "Accounting filed the {obj} with the state.",
    "The vendor delivered the shipment on {day}.",
    "Legal reviewed the {obj} without comment.",
)

# Would pass, except a negation appears.
NEGATED = (
    "You shouldn't send the {obj} until {day}.",
    "Please don't forward this {obj} to {name}.",
    "We couldn't close the account before the deadline.",
    "I can't review the {obj} this week.",
)

GREETINGS = ("Hi {name},", "Hello {name},", "Hey {name},", "Dear {name},")
SIGNOFFS = ("Best,\n{name}", "Thanks,\n{name}", "Regards,\n{name}", "Cheers,\n{name}")

# (pool, weight): actionable sentences lead, first-filter filler dominates
# the negatives, the rarer rejection modes stay represented.
_POOL_WEIGHTS = (
    (ACTIONABLE, 0.40),
    (NO_VERB, 0.38),
    (NO_PRONOUN, 0.12),
    (TOO_LONG, 0.05),
    (NEGATED, 0.05),
)


def _fill(template: str, rng: random.Random) -> str:
    return template.format(
        obj=rng.choice(OBJECTS),
        name=rng.choice(NAMES),
        day=rng.choice(DAYS),
        place=rng.choice(PLACES),
    )


def _body(rng: random.Random) -> str:
    lines = [_fill(rng.choice(GREETINGS), rng), ""]
    pools = [pool for pool, _ in _POOL_WEIGHTS]
    weights = [w for _, w in _POOL_WEIGHTS]
    for _ in range(rng.randint(3, 7)):
        pool = rng.choices(pools, weights=weights)[0]
        lines.append(_fill(rng.choice(pool), rng))
    lines.append("")
    lines.append(_fill(rng.choice(SIGNOFFS), rng))
    return "\n".join(lines)


def synthesize_raw(n_emails: int = 500, seed: int = 42) -> list[tuple[str, bytes]]:
    """Generate (relative path, raw rfc822-ish bytes) pairs, path-sorted."""
    rng = random.Random(f"{seed}|corpus")
    out = []
    for i in range(n_emails):
        sender = rng.choice(NAMES).lower()
        recipient = rng.choice(NAMES).lower()
        subject = f"{rng.choice(OBJECTS)} update"
        body = _body(rng)
        if rng.random() < 0.05:
            # occasional quoted reply tail, stripped away at ingest
            body += (
                "\n\n-----Original Message-----\n"
                "From: someone@example.com\n"
                "> earlier text that should vanish\n"
            )
        raw = (
            f"Message-ID: <{i}.{seed}@synthetic>\n"
            f"From: {sender}@example.com\n"
            f"To: {recipient}@example.com\n"
            f"Subject: {subject}\n"
            "\n"
            f"{body}\n"
        ).encode("utf-8")
        out.append((f"user{i % 10}/inbox/{i:04d}.txt", raw))
    return sorted(out)


def write_mini_corpus(root: Path | str, n_emails: int = 500, seed: int = 42) -> Path:
    """Materialize the synthetic corpus as a maildir-style tree."""
    root = Path(root)
    for rel, raw in synthesize_raw(n_emails, seed):
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(raw)
    return root


def mini_corpus(n_emails: int = 500, seed: int = 42) -> list[EmailMessage]:
    """The same corpus as parsed messages, without touching the filesystem."""
    return [
        parse_email(raw, source=rel) for rel, raw in synthesize_raw(n_emails, seed)
    ]
