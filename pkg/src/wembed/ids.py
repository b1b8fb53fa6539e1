"""Wikidata entity identifiers and item-property-item triples.

Identifiers are the "words" of the embedding: items ("Q22") and properties
("P31"). The serialized form is the canonical one used everywhere downstream
(vocabulary keys, model files, API paths).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

ENTITY_ID_RE = re.compile(r"^[QP][1-9][0-9]*$")


class EntityKind(Enum):
    ITEM = "Q"
    PROPERTY = "P"


class InvalidEntityId(ValueError):
    """Raised for strings that are not a well-formed item/property id."""


@dataclass(frozen=True, slots=True)
class EntityId:
    """A validated item (Q…) or property (P…) identifier."""

    kind: EntityKind
    number: int

    def __post_init__(self) -> None:
        if self.number < 1:
            raise InvalidEntityId(f"entity number must be positive, got {self.number}")

    @classmethod
    def parse(cls, text: str) -> "EntityId":
        if not ENTITY_ID_RE.match(text):
            raise InvalidEntityId(f"not a valid entity id: {text!r}")
        return cls(EntityKind(text[0]), int(text[1:]))

    @property
    def is_item(self) -> bool:
        return self.kind is EntityKind.ITEM

    @property
    def is_property(self) -> bool:
        return self.kind is EntityKind.PROPERTY

    def __str__(self) -> str:
        return f"{self.kind.value}{self.number}"


def is_valid_entity_id(text: str) -> bool:
    return bool(ENTITY_ID_RE.match(text))


@dataclass(frozen=True, slots=True)
class Triple:
    """One item -> property -> item edge, i.e. one 3-token training sentence."""

    subject: EntityId
    predicate: EntityId
    object: EntityId

    def __post_init__(self) -> None:
        if not self.subject.is_item:
            raise ValueError(f"triple subject must be an item, got {self.subject}")
        if not self.predicate.is_property:
            raise ValueError(f"triple predicate must be a property, got {self.predicate}")
        if not self.object.is_item:
            raise ValueError(f"triple object must be an item, got {self.object}")

    @classmethod
    def parse(cls, subject: str, predicate: str, object: str) -> "Triple":
        return cls(EntityId.parse(subject), EntityId.parse(predicate), EntityId.parse(object))

    def tokens(self) -> tuple[str, str, str]:
        return (str(self.subject), str(self.predicate), str(self.object))

    def __str__(self) -> str:
        return f"{self.subject} {self.predicate} {self.object}"
