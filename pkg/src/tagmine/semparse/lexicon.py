"""
Closed-class word lists and morphology tables for the builtin caption chunker.

All tables are frozen at import time.
"""

from types import MappingProxyType

DETERMINERS = frozenset({
    "a", "an", "the", "this", "these", "those", "some", "any", "its", "his", "her",
    "their", "our", "my", "your", "each", "every", "another", "other", "both", "no", "all",
})

NUMERALS = frozenset({
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "twenty", "hundred", "hundreds",
    "dozen", "dozens", "several", "many", "few", "multiple", "numerous", "couple", "pair",
    "group", "bunch", "lot", "lots", "herd", "flock", "number",
})

COPULAS = frozenset({"is", "are", "was", "were", "be", "been", "being", "am"})

PREPOSITIONS = frozenset({
    "on", "in", "at", "with", "near", "under", "over", "above", "below", "behind", "beside",
    "by", "of", "from", "into", "onto", "through", "across", "along", "against", "around",
    "between", "among", "inside", "outside", "atop", "toward", "towards", "underneath",
    "beneath", "within", "without", "during", "past", "to", "for", "off", "up", "down", "out",
    "about", "like", "upon", "via", "alongside", "amid",
})

# Longest match first when merging.
MULTIWORD_PREPOSITIONS = (
    ("in", "front", "of"),
    ("on", "top", "of"),
    ("next", "to"),
    ("close", "to"),
    ("out", "of"),
)

CONJUNCTIONS = frozenset({
    "and", "or", "but", "while", "as", "that", "which", "who", "whom", "whose", "where",
    "when", "then", "so", "because", "although", "though", "if",
    ",", ".", ";", ":", "!", "?",
})

# Conjunctions that may sit between coordinated adjectives ("black and white").
ADJECTIVE_COORDINATORS = frozenset({"and", "or", ","})

PRONOUNS = frozenset({
    "he", "she", "it", "they", "them", "him", "we", "us", "you", "i", "me", "someone",
    "somebody", "something", "anyone", "everyone", "everybody", "nothing", "itself",
    "himself", "herself", "themselves",
})

ADVERBS = frozenset({
    "very", "there", "here", "not", "also", "just", "too", "together", "almost", "quite",
    "really", "still", "away", "nearby", "outdoors", "indoors", "only", "even",
    "yet", "now", "again", "well",
})

ADJECTIVES = frozenset({
    # colours
    "red", "blue", "green", "yellow", "white", "black", "brown", "gray", "grey", "orange",
    "pink", "purple", "golden", "silver", "tan", "beige", "dark", "bright", "colorful",
    "colourful",
    # size and shape
    "large", "big", "small", "little", "tiny", "huge", "giant", "tall", "short", "long",
    "wide", "narrow", "round", "flat", "thin", "thick", "fat", "high", "low",
    # age, state, weather, material
    "old", "young", "new", "modern", "antique", "empty", "full", "open", "broken", "clean",
    "dirty", "wet", "dry", "busy", "quiet", "crowded", "fresh", "ripe", "hot", "cold",
    "warm", "sunny", "cloudy", "rainy", "snowy", "grassy", "sandy", "rocky", "leafy",
    "shady", "foggy", "stormy", "wooden", "metal", "metallic", "plastic",
    # appearance and other common qualities
    "pretty", "cute", "happy", "sad", "elderly", "adult", "male", "female", "striped",
    "spotted", "fluffy", "furry", "shiny", "various", "different", "single", "double",
    "healthy", "fancy", "nice", "good", "great", "electric", "public", "wild", "stuffed",
    "frosted", "sliced", "fried", "toasted", "grilled", "cooked", "lush", "calm", "curly",
    "lonely", "friendly", "ugly",
})

ADJECTIVE_SUFFIXES = ("ful", "ous", "ive", "able", "ible", "ish", "less")

# Base forms of content verbs; inflected forms are recognised after normalization.
VERBS = frozenset({
    "sit", "stand", "lie", "lay", "hold", "ride", "eat", "drink", "play", "look", "walk",
    "run", "fly", "carry", "wear", "watch", "throw", "catch", "hit", "swing", "jump",
    "wait", "graze", "cross", "park", "surf", "ski", "skate", "sleep", "cover", "have",
    "chase", "pull", "push", "drive", "cut", "cook", "talk", "read", "use", "take",
    "make", "show", "fill", "line", "hang", "lean", "rest", "kick", "climb", "swim",
    "feed", "pet", "hug", "kiss", "smile", "laugh", "pose", "grab", "prepare", "serve",
    "shop", "sell", "perch", "float", "sail", "land", "load", "wash", "brush", "check",
    "point", "reach", "stare", "approach", "follow", "lead", "travel", "head", "move",
    "go", "come", "dance", "sing", "paint", "build", "stop", "bite", "chew", "lick",
    "sniff", "cuddle", "drag", "tow", "jog", "race", "toss", "stir", "slice", "grill",
    "bake", "dress", "close", "raise", "shine", "hike", "bike", "type", "write", "wave",
    "photograph", "display", "gather", "enjoy", "sip", "hop", "splash", "wade", "roll",
})

# Nouns that merely look like -ing verb forms.
NOUN_ING = frozenset({
    "building", "ceiling", "painting", "clothing", "wedding", "evening", "morning",
    "railing", "parking", "sibling", "pudding", "icing", "frosting", "bedding", "awning",
    "king", "wing", "ring", "thing", "string", "sling", "swing", "spring", "sting",
    "duckling", "dumpling", "seedling", "stuffing", "filling", "topping", "ending",
    "landing", "lighting", "housing", "dressing", "siding", "living",
    "dining", "seating", "ping", "bring", "something", "nothing", "everything",
    "anything", "during", "shilling", "darling", "earring", "offering",
})

# Words that the plural and verb rules must leave alone.
INVARIANT = frozenset({
    "sheep", "deer", "fish", "series", "species", "clothes", "pants", "jeans", "shorts",
    "scissors", "news", "lens", "tennis", "christmas", "this", "his", "was", "its",
    "always", "perhaps", "yes", "canvas", "plus", "gas", "bus", "physics", "athletics",
    "aircraft", "glasses", "sunglasses", "goggles", "overalls", "trousers", "binoculars",
    "towards", "afterwards", "sometimes", "besides", "whereas", "oats", "chess",
})

IRREGULAR = MappingProxyType({
    # nouns
    "men": "man", "women": "woman", "children": "child", "people": "person",
    "feet": "foot", "teeth": "tooth", "mice": "mouse", "geese": "goose", "oxen": "ox",
    "cacti": "cactus", "buses": "bus", "knives": "knife", "leaves": "leaf",
    "wolves": "wolf", "shelves": "shelf", "loaves": "loaf", "halves": "half",
    "calves": "calf", "scarves": "scarf", "lives": "life", "wives": "wife",
    "tomatoes": "tomato", "potatoes": "potato", "heroes": "hero", "mangoes": "mango",
    "volcanoes": "volcano", "dice": "die", "police": "police", "dishes": "dish",
    # verbs
    "has": "have", "had": "have", "having": "have", "lying": "lie", "lies": "lie",
    "sat": "sit", "stood": "stand", "ran": "run", "rode": "ride", "ate": "eat",
    "held": "hold", "flew": "fly", "flown": "fly", "went": "go", "made": "make",
    "took": "take", "caught": "catch", "threw": "throw", "thrown": "throw",
    "worn": "wear", "wore": "wear", "laid": "lay", "hung": "hang", "led": "lead",
    "fed": "feed", "skiing": "ski", "skis": "ski", "does": "do", "goes": "go",
    "written": "write", "eaten": "eat", "ridden": "ride", "driven": "drive",
})
