//! Built-in item pools.
//!
//! The letters pool is pinned to the 26 uppercase Latin letters; digits are
//! the numerals 0..=99 so sampling without replacement covers training
//! lengths up to 50; each word pool carries at least 60 single-token common
//! English nouns. Pool contents are part of the reproducibility contract
//! and must not be reordered or edited casually.

pub const ANIMALS: &[&str] = &[
    "aardvark", "albatross", "alligator", "antelope", "armadillo", "baboon", "badger", "bat",
    "bear", "beaver", "bison", "buffalo", "camel", "caribou", "cassowary", "cat", "chameleon",
    "cheetah", "chimpanzee", "chinchilla", "cobra", "condor", "cougar", "coyote", "crane",
    "crocodile", "crow", "deer", "dingo", "dolphin", "donkey", "dove", "duck", "eagle", "echidna",
    "elephant", "elk", "falcon", "ferret", "flamingo", "fox", "gazelle", "gecko", "gibbon",
    "giraffe", "goat", "goose", "gorilla", "hamster", "hawk", "hedgehog", "heron", "horse",
    "hyena", "ibex", "iguana", "jackal", "jaguar", "jellyfish", "kangaroo", "koala", "lemur",
    "leopard", "lion", "llama", "lobster", "lynx", "magpie", "manatee", "meerkat", "mongoose",
    "moose", "narwhal", "newt", "ocelot", "octopus", "opossum", "orangutan", "ostrich", "otter",
    "owl", "panda", "pangolin", "panther", "parrot", "peacock", "pelican", "penguin", "pheasant",
    "porcupine", "porpoise", "puffin", "puma", "quail", "rabbit", "raccoon", "raven", "reindeer",
    "salamander", "seal", "shark", "sheep", "skunk", "sloth", "snail", "sparrow", "squid",
    "squirrel", "starling", "stork", "swan", "tapir", "tiger", "toad", "tortoise", "toucan",
    "turkey", "turtle", "vulture", "wallaby", "walrus", "warthog", "weasel", "whale", "wolf",
    "wolverine", "wombat", "woodpecker", "yak", "zebra",
];

pub const FRUITS: &[&str] = &[
    "apple", "apricot", "avocado", "banana", "blackberry", "blueberry", "boysenberry",
    "breadfruit", "cantaloupe", "carambola", "cherimoya", "cherry", "clementine", "coconut",
    "cranberry", "currant", "damson", "date", "dragonfruit", "durian", "elderberry", "feijoa",
    "fig", "gooseberry", "grape", "grapefruit", "guava", "honeydew", "huckleberry", "jackfruit",
    "jujube", "kiwi", "kumquat", "lemon", "lime", "lingonberry", "longan", "loquat", "lychee",
    "mandarin", "mango", "mangosteen", "melon", "mulberry", "nectarine", "olive", "orange",
    "papaya", "passionfruit", "peach", "pear", "persimmon", "pineapple", "plantain", "plum",
    "pomegranate", "pomelo", "quince", "rambutan", "raspberry", "redcurrant", "soursop",
    "strawberry", "tamarind", "tangerine", "watermelon",
];

pub const CITIES: &[&str] = &[
    "amsterdam", "athens", "atlanta", "auckland", "baghdad", "bangkok", "barcelona", "beijing",
    "belgrade", "berlin", "bogota", "boston", "brisbane", "brussels", "bucharest", "budapest",
    "cairo", "calgary", "canberra", "caracas", "casablanca", "chicago", "copenhagen", "dakar",
    "dallas", "damascus", "delhi", "denver", "detroit", "dubai", "dublin", "edinburgh",
    "florence", "frankfurt", "geneva", "glasgow", "hamburg", "hanoi", "harare", "havana",
    "helsinki", "houston", "istanbul", "jakarta", "johannesburg", "kampala", "karachi",
    "kathmandu", "kingston", "kinshasa", "kolkata", "kyoto", "lagos", "lahore", "lima", "lisbon",
    "london", "luanda", "lyon", "madrid", "manila", "marrakesh", "melbourne", "miami", "milan",
    "montreal", "moscow", "mumbai", "munich", "nairobi", "naples", "oslo", "ottawa", "paris",
    "perth", "prague", "pretoria", "quito", "reykjavik", "riga", "rome", "santiago", "seattle",
    "seoul", "shanghai", "singapore", "sofia", "stockholm", "sydney", "taipei", "tehran",
    "tokyo", "toronto", "tunis", "valencia", "vancouver", "venice", "vienna", "warsaw",
    "wellington", "yokohama", "zagreb", "zurich",
];

pub const ELEMENTS: &[&str] = &[
    "hydrogen", "helium", "lithium", "beryllium", "boron", "carbon", "nitrogen", "oxygen",
    "fluorine", "neon", "sodium", "magnesium", "aluminium", "silicon", "phosphorus", "sulfur",
    "chlorine", "argon", "potassium", "calcium", "scandium", "titanium", "vanadium", "chromium",
    "manganese", "iron", "cobalt", "nickel", "copper", "zinc", "gallium", "germanium", "arsenic",
    "selenium", "bromine", "krypton", "rubidium", "strontium", "yttrium", "zirconium", "niobium",
    "molybdenum", "technetium", "ruthenium", "rhodium", "palladium", "silver", "cadmium",
    "indium", "tin", "antimony", "tellurium", "iodine", "xenon", "cesium", "barium", "lanthanum",
    "cerium", "praseodymium", "neodymium", "promethium", "samarium", "europium", "gadolinium",
    "terbium", "dysprosium", "holmium", "erbium", "thulium", "ytterbium", "lutetium", "hafnium",
    "tantalum", "tungsten", "rhenium", "osmium", "iridium", "platinum", "gold", "mercury",
    "thallium", "lead", "bismuth",
];

pub const LANGUAGES: &[&str] = &[
    "albanian", "amharic", "arabic", "armenian", "azerbaijani", "basque", "belarusian",
    "bengali", "bosnian", "bulgarian", "burmese", "catalan", "cebuano", "croatian", "czech",
    "danish", "dutch", "english", "estonian", "finnish", "french", "galician", "georgian",
    "german", "greek", "gujarati", "hausa", "hebrew", "hindi", "hungarian", "icelandic", "igbo",
    "indonesian", "italian", "japanese", "javanese", "kannada", "kazakh", "khmer", "korean",
    "kurdish", "lao", "latin", "latvian", "lithuanian", "macedonian", "malay", "malayalam",
    "maltese", "mandarin", "marathi", "mongolian", "nepali", "norwegian", "pashto", "persian",
    "polish", "portuguese", "punjabi", "romanian", "russian", "serbian", "sinhala", "slovak",
    "slovenian", "somali", "spanish", "swahili", "swedish", "tagalog", "tamil", "telugu",
    "thai", "turkish", "ukrainian", "urdu", "uzbek", "vietnamese", "welsh", "yoruba", "zulu",
];

pub const INSTRUMENTS: &[&str] = &[
    "accordion", "bagpipes", "balalaika", "bandura", "banjo", "bassoon", "bongo", "bugle",
    "castanets", "celesta", "cello", "cimbalom", "clarinet", "clavichord", "conga", "cornet",
    "cowbell", "didgeridoo", "drum", "dulcimer", "euphonium", "fiddle", "flugelhorn", "flute",
    "glockenspiel", "guitar", "harmonica", "harp", "harpsichord", "kalimba", "kazoo", "koto",
    "lute", "lyre", "mandolin", "maracas", "marimba", "melodica", "oboe", "ocarina", "organ",
    "oud", "piano", "piccolo", "recorder", "saxophone", "shakuhachi", "shamisen", "sitar",
    "sousaphone", "tabla", "tambourine", "theremin", "timpani", "triangle", "trombone",
    "trumpet", "tuba", "ukulele", "vibraphone", "viola", "violin", "whistle", "xylophone",
    "zither",
];
