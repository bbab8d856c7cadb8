import random

import pytest

from posterpanel.canvas import (
    CanvasDocument,
    Element,
    ImagePayload,
    TextPayload,
    VectorPayload,
)


def text_element(elem_id, x=0, y=0, w=100, h=40, content="Hello", font_size=16,
                 fill="#000000", rotation=0.0, family="Arial"):
    return Element(
        id=elem_id, kind="text", x=x, y=y, width=w, height=h, rotation=rotation,
        payload=TextPayload(content=content, font_size=font_size, font_family=family, fill=fill),
    )


def image_element(elem_id, x=0, y=0, w=120, h=80, source="old.png", rotation=0.0):
    return Element(
        id=elem_id, kind="image", x=x, y=y, width=w, height=h, rotation=rotation,
        payload=ImagePayload(source=source),
    )


def vector_element(elem_id, x=0, y=0, w=30, h=30, data="<svg/>", z_hint=0):
    return Element(
        id=elem_id, kind="vector", x=x, y=y, width=w, height=h,
        payload=VectorPayload(data=data, z_hint=z_hint),
    )


@pytest.fixture
def poster_doc():
    """A small mixed-kind poster used across suites."""
    return CanvasDocument(
        width=800,
        height=600,
        elements=(
            text_element("t1", 40, 40, 300, 60, content="Spring Sale", font_size=32),
            text_element("t2", 40, 120, 400, 40, content="Everything must go"),
            image_element("img1", 400, 200, 240, 180, source="old.png"),
            vector_element("v1", 0, 0, 800, 80, z_hint=3),
        ),
    )


def random_document(rng: random.Random, max_elements=10, page=400) -> CanvasDocument:
    """Random axis-aligned integer-coordinate document (pixel-oracle friendly)."""
    n = rng.randint(0, max_elements)
    elements = []
    for i in range(n):
        kind = rng.choice(["text", "image", "vector"])
        x = rng.randint(-50, page)
        y = rng.randint(-50, page)
        w = rng.randint(0, 180)
        h = rng.randint(0, 140)
        if kind == "text":
            elements.append(text_element(f"e{i}", x, y, w, h, content=f"txt {i}"))
        elif kind == "image":
            elements.append(image_element(f"e{i}", x, y, w, h, source=f"img{i}.png"))
        else:
            elements.append(vector_element(f"e{i}", x, y, w, h, z_hint=i))
    return CanvasDocument(width=page, height=page, elements=tuple(elements))
