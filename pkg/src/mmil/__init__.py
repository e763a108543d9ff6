"""Toolkit for the MMIL multimodal meaning-representation language."""

from mmil.codec import parse_component, read_component, serialize_component
from mmil.model import (
    CategoryValue,
    Entity,
    Kind,
    MmilComponent,
    MmilError,
    Relation,
    TempSpan,
    add_entity,
    add_relation,
    create_component,
    get_category,
    structural_equals,
)
from mmil.registry import Registry, default_registry

__all__ = [
    "CategoryValue",
    "Entity",
    "Kind",
    "MmilComponent",
    "MmilError",
    "Registry",
    "Relation",
    "TempSpan",
    "add_entity",
    "add_relation",
    "create_component",
    "default_registry",
    "get_category",
    "parse_component",
    "read_component",
    "serialize_component",
    "structural_equals",
]
