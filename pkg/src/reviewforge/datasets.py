"""Synthetic restaurant-review corpus for desk-scale experiments.

``make_reviews`` samples businesses (name, city, state, cuisine tags, a latent
quality) and writes reviews from a phrase grammar whose content depends on the
business: dishes follow the cuisine, sentiment follows the star rating, and
the city or name is sometimes mentioned. The output uses the same JSON-lines
schema as real review dumps, so it flows through the normal ingestion path.
"""

import numpy as np

from .corpus import RawRecord

CITIES = (
    ("Las Vegas", "NV"), ("Henderson", "NV"), ("Phoenix", "AZ"), ("Scottsdale", "AZ"),
    ("Tempe", "AZ"), ("Mesa", "AZ"), ("Charlotte", "NC"), ("Pittsburgh", "PA"),
    ("Cleveland", "OH"), ("Madison", "WI"), ("Champaign", "IL"), ("Toronto", "ON"),
    ("Montreal", "QC"), ("Calgary", "AB"),
)

CUISINES = {
    "Mexican": ("tacos", "burritos", "enchiladas", "carne asada", "guacamole", "chips and salsa",
                "fish tacos", "street tacos", "carnitas", "queso", "tamales", "fajitas"),
    "Italian": ("pasta", "lasagna", "margherita pizza", "meatballs", "tiramisu", "garlic knots",
                "gnocchi", "carbonara", "calamari", "bruschetta", "risotto", "cannoli"),
    "Chinese": ("orange chicken", "fried rice", "dumplings", "lo mein", "kung pao chicken",
                "egg rolls", "hot and sour soup", "chow mein", "lettuce wraps", "dim sum",
                "mongolian beef", "wonton soup"),
    "Japanese": ("sushi", "ramen", "sashimi", "tempura", "miso soup", "spicy tuna roll",
                 "edamame", "udon", "gyoza", "teriyaki chicken", "poke bowl", "salmon roll"),
    "American (Traditional)": ("burger", "fries", "wings", "mac and cheese", "meatloaf",
                               "club sandwich", "onion rings", "steak", "fried chicken",
                               "mashed potatoes", "milkshake", "pot roast"),
    "Gastropubs": ("burger", "bone marrow", "fish and chips", "pork belly", "truffle fries",
                   "sampler platter", "scotch egg", "flatbread", "brussels sprouts",
                   "short rib", "beer selection", "pretzel"),
    "Thai": ("pad thai", "green curry", "red curry", "tom yum soup", "spring rolls",
             "drunken noodles", "mango sticky rice", "pad see ew", "papaya salad",
             "panang curry", "thai tea", "basil chicken"),
    "Breakfast & Brunch": ("pancakes", "eggs benedict", "french toast", "omelette", "hash browns",
                           "waffles", "biscuits and gravy", "breakfast burrito", "bacon",
                           "avocado toast", "coffee", "mimosas"),
    "Pizza": ("pepperoni pizza", "crust", "garlic bread", "wings", "calzone", "cheese pizza",
              "white pizza", "salad", "breadsticks", "slice", "meat lovers pizza", "sauce"),
    "Indian": ("chicken tikka masala", "naan", "samosas", "butter chicken", "biryani",
               "lamb vindaloo", "saag paneer", "garlic naan", "mango lassi", "dal",
               "tandoori chicken", "chana masala"),
}

NAME_ADJ = ("Golden", "Blue", "Red", "Little", "Big", "Lucky", "Happy", "Old", "Green", "Silver",
            "Royal", "Crazy", "Hungry", "Rusty", "Sunny", "Urban", "Public", "Copper")
NAME_NOUN = ("Dragon", "Door", "Spoon", "Fork", "House", "Table", "Garden", "Kitchen", "Lantern",
             "Oak", "Corner", "Bowl", "Pig", "Lotus", "Tavern", "Harbor", "Bistro", "Grill")
NAME_PERSON = ("Tony", "Maria", "Joe", "Sam", "Lee", "Rosa", "Frank", "Kim", "Nick", "Lucy",
               "P.F. Chang", "Mike", "Ana", "Raj")
NAME_KIND = {
    "Mexican": ("Taqueria", "Cantina", "Cocina"), "Italian": ("Trattoria", "Ristorante", "Pasta House"),
    "Chinese": ("Wok", "Palace", "Garden"), "Japanese": ("Sushi", "Ramen Bar", "Izakaya"),
    "American (Traditional)": ("Diner", "Grill", "Kitchen"), "Gastropubs": ("Public House", "Pub", "Tap Room"),
    "Thai": ("Thai Kitchen", "Thai Cafe", "Thai Bistro"), "Breakfast & Brunch": ("Cafe", "Pancake House", "Diner"),
    "Pizza": ("Pizzeria", "Pizza Co", "Slice Shop"), "Indian": ("Curry House", "Tandoor", "Indian Kitchen"),
}
EXTRA_TAGS = ("Bars", "Nightlife", "Sandwiches", "Salad", "Seafood", "Desserts", "Cocktail Bars",
              "Vegetarian", "Fast Food", "Food")

POS_ADJ = ("great", "amazing", "delicious", "awesome", "fantastic", "excellent", "fresh", "tasty",
           "perfect", "incredible", "solid", "really good", "so good", "outstanding", "yummy")
NEG_ADJ = ("bland", "cold", "overcooked", "greasy", "dry", "salty", "soggy", "disappointing",
           "mediocre", "awful", "terrible", "stale", "undercooked", "tasteless")
MID_ADJ = ("okay", "decent", "fine", "average", "not bad", "alright", "pretty good", "a bit salty")
STAFF = ("server", "waitress", "waiter", "staff", "bartender", "manager", "owner", "hostess")
STAFF_POS = ("friendly", "attentive", "super nice", "helpful", "awesome", "very sweet", "on point")
STAFF_NEG = ("rude", "slow", "clueless", "inattentive", "unfriendly", "annoyed", "nowhere to be found")
COMPANION = ("my wife", "my husband", "my friends", "my family", "the kids", "a coworker",
             "my boyfriend", "my girlfriend", "my parents", "my sister", "a few friends", "my mom")
MEAL = ("lunch", "dinner", "brunch", "breakfast", "happy hour", "a late dinner", "a quick bite")
WHEN = ("last night", "yesterday", "on Friday", "this weekend", "last week", "tonight",
        "on Saturday", "for my birthday", "after work", "on a Sunday")
DRINK = ("beer", "wine", "margaritas", "cocktails", "coffee", "iced tea", "sangria", "lemonade")
ASPECT = ("atmosphere", "decor", "patio", "music", "parking", "location", "ambiance", "vibe")
PRICE_POS = ("reasonable", "fair", "a steal", "very affordable", "worth every penny")
PRICE_NEG = ("way too high", "a rip off", "overpriced", "too much for what you get")

OPENERS = {
    "pos": (
        "{Excl}", "Love this place{bang}", "What a gem{bang}", "This place is {posadj}{bang}",
        "Came here {when} with {companion} for {meal}.", "First time here and it will not be the last{bang}",
        "We stopped by {when} for {meal}.", "Best {dish} in {city}{bang}", "I have been coming here for years.",
        "My new favorite spot in {city}{bang}", "Finally tried {name} {when}.",
        "If you are in {city} you have to try this place.", "So glad we found this place{bang}",
        "Wow{bang}", "Great spot for {meal}.",
    ),
    "mid": (
        "Came here {when} for {meal}.", "This place is {midadj}.", "I wanted to like this place.",
        "Stopped in {when} with {companion}.", "Mixed feelings about {name}.",
        "It was my second time at {name}.", "Decent spot in {city}.",
    ),
    "neg": (
        "Very disappointed.", "Not impressed.", "I really wanted to like this place.",
        "Came here {when} and regret it.", "Avoid this place.", "What happened to {name}?",
        "We went {when} for {meal} and it was a mess.", "Worst {dish} in {city}.",
        "Never again.", "Ugh.",
    ),
}

BODY = {
    "pos": (
        "The {dish} was {posadj} and the {dish2} was even better.",
        "I had the {dish} and it was {posadj}.",
        "We ordered the {dish} and the {dish2} and loved both.",
        "Our {staff} was {staffpos} and made great recommendations.",
        "Service was fast and the {staff} was {staffpos}.",
        "The {aspect} is really nice and the {drink} was cold.",
        "Prices are {pricepos} for the portions.",
        "Try the {dish}{bang}", "The {dish} is a must.",
        "Everything we tried was {posadj}.",
        "Portions are huge so come hungry.",
        "They have a great selection of {drink}.",
        "{companion_cap} got the {dish} and could not stop talking about it.",
        "The {dish} tasted really fresh.",
        "Love the {aspect} here.",
        "It gets busy on weekends but the wait is worth it.",
        "The {dish} came out hot and {posadj}.",
    ),
    "mid": (
        "The {dish} was {midadj} but the {dish2} was {posadj}.",
        "Our {staff} was {staffpos} but the food took a while.",
        "The {dish} was {midadj}, nothing special.",
        "Prices are a little high but the {aspect} is nice.",
        "I had the {dish} and it was {midadj}.",
        "The {drink} was good but the {dish} was {negadj}.",
        "Service was slow but the {staff} was nice.",
        "It was pretty busy and loud.",
    ),
    "neg": (
        "The {dish} was {negadj} and the {dish2} was not much better.",
        "Our {staff} was {staffneg} and we waited forever.",
        "We waited {minutes} minutes for our food.",
        "I ordered the {dish} and it came out {negadj}.",
        "Prices are {priceneg}.",
        "The {staff} was {staffneg} when we asked for the check.",
        "The place was dirty and the {aspect} was awful.",
        "My {dish} was {negadj} and they did not even say sorry.",
        "They got our order wrong twice.",
        "The {drink} was warm and flat.",
    ),
}

CLOSERS = {
    "pos": (
        "Will definitely be back{bang}", "Highly recommend{bang}", "Can not wait to come back{bang}",
        "Five stars{bang}", "We will be back soon.", "Thanks {name}{bang}", "Go here{bang}",
        "Do not miss the {dish}.", "I would recommend the {dish} to anyone.", "",
    ),
    "mid": (
        "Might come back.", "Three stars.", "It is okay if you are in the area.",
        "Not sure I would come back.", "",
    ),
    "neg": (
        "Will not be back.", "Save your money.", "Two stars for the {drink}.", "Do not waste your time.",
        "Go somewhere else.", "Zero stars if I could.", "",
    ),
}

EXCL = ("Amazing!", "Yum!", "So good!", "Delicious!", "Excellent food and service.")


def _pick(rng, seq):
    return seq[rng.integers(len(seq))]


def _sentiment(rating):
    return "pos" if rating >= 4 else ("mid" if rating == 3 else "neg")


class _Business:
    def __init__(self, rng):
        self.cuisine = _pick(rng, list(CUISINES))
        city, state = CITIES[rng.integers(len(CITIES))]
        self.city, self.state = city, state
        style = rng.integers(4)
        kind = _pick(rng, NAME_KIND[self.cuisine])
        if style == 0:
            self.name = f"{_pick(rng, NAME_ADJ)} {_pick(rng, NAME_NOUN)}"
        elif style == 1:
            self.name = f"{_pick(rng, NAME_PERSON)}'s {kind}"
        elif style == 2:
            self.name = f"The {_pick(rng, NAME_ADJ)} {kind}"
        else:
            self.name = f"{_pick(rng, NAME_NOUN)} {kind}"
        tags = [self.cuisine]
        if rng.random() < 0.5:
            tags.append(_pick(rng, EXTRA_TAGS))
        tags.append("Restaurants")
        self.tags = tuple(tags)
        self.quality = rng.uniform(2.0, 4.9)
        dishes = CUISINES[self.cuisine]
        self.signature = tuple(rng.choice(len(dishes), size=3, replace=False))


def _fill(template, biz, rng):
    dishes = CUISINES[biz.cuisine]
    # the business's signature dishes come up more often
    def dish():
        if rng.random() < 0.5:
            return dishes[biz.signature[rng.integers(3)]]
        return dishes[rng.integers(len(dishes))]

    d1 = dish()
    d2 = dish()
    while d2 == d1:
        d2 = dishes[rng.integers(len(dishes))]
    companion = _pick(rng, COMPANION)
    slots = {
        "dish": d1, "dish2": d2, "city": biz.city, "name": biz.name,
        "posadj": _pick(rng, POS_ADJ), "negadj": _pick(rng, NEG_ADJ), "midadj": _pick(rng, MID_ADJ),
        "staff": _pick(rng, STAFF), "staffpos": _pick(rng, STAFF_POS), "staffneg": _pick(rng, STAFF_NEG),
        "companion": companion, "companion_cap": companion[0].upper() + companion[1:],
        "meal": _pick(rng, MEAL), "when": _pick(rng, WHEN), "drink": _pick(rng, DRINK),
        "aspect": _pick(rng, ASPECT), "pricepos": _pick(rng, PRICE_POS), "priceneg": _pick(rng, PRICE_NEG),
        "minutes": str(int(rng.choice((20, 30, 40, 45, 60)))),
        "bang": _pick(rng, (".", "!", "!", "!!", "!!!")), "Excl": _pick(rng, EXCL),
    }
    return template.format(**slots)


def _review(biz, rating, rng):
    mood = _sentiment(rating)
    parts = []
    if rng.random() < 0.85:
        parts.append(_fill(_pick(rng, OPENERS[mood]), biz, rng))
    n_body = int(rng.integers(1, 4))
    body = BODY[mood]
    for j in rng.choice(len(body), size=n_body, replace=False):
        parts.append(_fill(body[j], biz, rng))
    if mood != "pos" and rng.random() < 0.3:
        parts.insert(int(rng.integers(len(parts) + 1)), _fill(_pick(rng, BODY["pos"]), biz, rng))
    closer = _fill(_pick(rng, CLOSERS[mood]), biz, rng)
    if closer:
        parts.append(closer)
    text = " ".join(parts)
    if rng.random() < 0.15:
        text = text.lower()
    return text


def make_reviews(n_reviews=20000, n_businesses=400, seed=0):
    """Sample ``n_reviews`` ``RawRecord`` objects spread over ``n_businesses``.

    Deterministic for a fixed ``seed``.
    """
    rng = np.random.default_rng(seed)
    businesses = [_Business(rng) for _ in range(n_businesses)]
    # a few popular places collect most reviews
    popularity = rng.pareto(1.5, size=n_businesses) + 1.0
    popularity /= popularity.sum()
    owners = rng.choice(n_businesses, size=n_reviews, p=popularity)
    records = []
    for b in owners:
        biz = businesses[b]
        rating = int(np.clip(np.rint(rng.normal(biz.quality, 1.0)), 1, 5))
        records.append(RawRecord(_review(biz, rating, rng), rating, biz.name, biz.city, biz.state, biz.tags))
    return records
