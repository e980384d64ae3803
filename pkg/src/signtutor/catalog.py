"""Built-in demo catalog: 19 ASL signs in 8 families.

Signs inside one family share the hand form and differ in head motion or
facial expression, which is exactly the situation the head-only re-decision
exists for.  Descriptions are short practice hints, not linguistic
definitions.
"""

from .ingest import CatalogSign, SignCatalog


def demo_catalog() -> SignCatalog:
    signs = [
        CatalogSign(
            "here", "here",
            "right hand circles horizontally, palm up",
            "single nod", "here",
        ),
        CatalogSign(
            "is-here", "is here?",
            "right hand circles horizontally, palm up",
            "brows raised, head tilts forward", "here",
        ),
        CatalogSign(
            "not-here", "not here",
            "right hand circles horizontally, palm up",
            "head shake", "here",
        ),
        CatalogSign(
            "clean", "clean",
            "right palm sweeps across upturned left palm",
            "", "clean",
        ),
        CatalogSign(
            "very-clean", "very clean",
            "right palm sweeps across upturned left palm",
            "sharp head turn back to front, lips pressed", "clean",
        ),
        CatalogSign(
            "afraid", "afraid",
            "open hands travel from the sides to meet mid-chest",
            "", "afraid",
        ),
        CatalogSign(
            "very-afraid", "very afraid",
            "open hands meet mid-chest and tremble there",
            "eyes wide, lips open", "afraid",
        ),
        CatalogSign(
            "fast", "fast",
            "hands pull sharply toward the body, thumbs out",
            "", "fast",
        ),
        CatalogSign(
            "very-fast", "very fast",
            "hands pull sharply toward the body, thumbs out",
            "eyes wide, sharp single nod", "fast",
        ),
        CatalogSign(
            "to-drink", "to drink",
            "cupped hand tips toward the mouth once",
            "head tips back with the hand", "drink",
        ),
        CatalogSign(
            "drink-noun", "drink (noun)",
            "cupped hand tips toward the mouth, repeated small motion",
            "", "drink",
        ),
        CatalogSign(
            "to-open-door", "to open door",
            "flat hands face out; one swings away once",
            "", "door",
        ),
        CatalogSign(
            "open-door-noun", "open door (noun)",
            "flat hands face out; small repeated swing",
            "", "door",
        ),
        CatalogSign(
            "study", "study",
            "right fingers flutter over upturned left palm",
            "", "study",
        ),
        CatalogSign(
            "study-cont", "study continuously",
            "fluttering right hand rides a wide downward circle",
            "circular head motion with the hands", "study",
        ),
        CatalogSign(
            "study-reg", "study regularly",
            "right hand chops down and up over the left palm, no flutter",
            "downward head beats with the hands", "study",
        ),
        CatalogSign(
            "look-at", "look at",
            "paired V-hands move forward from the eyes once",
            "", "look",
        ),
        CatalogSign(
            "look-at-cont", "look at continuously",
            "paired V-hands sweep forward in a wide circle",
            "circular head motion with the hands", "look",
        ),
        CatalogSign(
            "look-at-reg", "look at regularly",
            "paired V-hands jab forward and back in beats",
            "downward head beats with the hands", "look",
        ),
    ]
    return SignCatalog(signs)
