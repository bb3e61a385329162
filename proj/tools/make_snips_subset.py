#!/usr/bin/env python3
"""Generate the vendored SNIPS-style training fixture.

Writes data/snips_subset.json (RASA common-examples layout) and
data/snips_subset.md (RASA markdown) holding 100 utterances for each of the
seven SNIPS intents. Slot names follow the public SNIPS benchmark. Output is
fully determined by --seed.
"""

import argparse
import json
import random
import re
from pathlib import Path

V = {
    "playlist": [
        "this is dr. dre", "workout twerkout", "chill vibes", "rock classics",
        "indie folk", "dinner jazz", "sleep", "beast mode", "afternoon acoustic",
        "my road trip", "piano ballads", "latin hits", "soul revival",
        "electronic focus", "summer party", "rainy day", "country gold",
        "throwback thursday", "deep house relax", "metal essentials",
        "songs to sing in the car", "all out 80s", "coffee table jazz",
    ],
    "music_item": ["song", "track", "album", "tune", "artist", "playlist"],
    "artist": [
        "madonna", "bob dylan", "adele", "john lennon", "nina simone",
        "miles davis", "taylor swift", "kanye west", "david bowie",
        "ella fitzgerald", "johnny cash", "bjork", "frank ocean",
        "aretha franklin", "radiohead", "beyonce", "stevie wonder",
        "elvis presley", "rihanna", "leonard cohen", "drake", "sia",
    ],
    "playlist_owner": ["my", "our", "his", "her"],
    "restaurant_type": [
        "restaurant", "bar", "pub", "bistro", "brasserie", "diner",
        "taverna", "cafeteria", "food truck", "steakhouse", "pizzeria",
    ],
    "cuisine": [
        "italian", "mexican", "thai", "french", "indian", "japanese",
        "greek", "korean", "vegetarian", "seafood", "barbecue",
    ],
    "party_size_number": ["two", "three", "four", "five", "six", "2", "4", "7", "ten", "eight"],
    "party_size_description": ["me and my wife", "my family", "me and my friends", "my parents and me"],
    "city": [
        "boston", "paris", "new york", "chicago", "london", "berlin",
        "seattle", "tokyo", "madrid", "denver", "austin", "san francisco",
        "rome", "dublin", "miami", "portland", "atlanta", "toronto",
    ],
    "state": [
        "california", "texas", "ohio", "vermont", "oregon", "florida",
        "nevada", "maine", "utah", "georgia", "alaska",
    ],
    "country": [
        "france", "spain", "italy", "canada", "japan", "brazil", "kenya",
        "norway", "mexico", "peru", "egypt", "india",
    ],
    "timeRange": [
        "tomorrow", "tonight", "today", "next week", "this weekend",
        "at 7 pm", "in two hours", "on friday", "next monday", "noon",
        "this evening", "saturday night", "in 5 minutes", "at 8",
    ],
    "spatial_relation": ["near", "close to", "in the area of", "around", "nearby"],
    "condition_description": ["rain", "snow", "sunny", "cloudy", "windy", "foggy", "hot", "cold", "humid"],
    "condition_temperature": ["warm", "freezing", "chilly", "hotter", "colder"],
    "current_location": ["here", "my location", "current position", "where i am"],
    "genre": ["jazz", "rock", "pop", "blues", "reggae", "hip hop", "classical", "techno", "funk", "soul music", "metal"],
    "service": ["spotify", "deezer", "youtube", "pandora", "itunes", "soundcloud", "last fm", "groove shark"],
    "year": ["1980", "1995", "2004", "the sixties", "the seventies", "the nineties", "2012", "1975"],
    "sort": ["top", "newest", "latest", "popular", "best", "top-50", "last"],
    "track": ["yesterday", "hey jude", "let it be", "smooth operator", "lose yourself", "dancing queen", "wonderwall", "halo", "clocks", "creep"],
    "album": ["thriller", "abbey road", "nevermind", "rumours", "blue", "purple rain", "the wall", "kind of blue"],
    "object_name": [
        "the hobbit", "war and peace", "dune", "moby dick", "the road",
        "great expectations", "the shining", "little women", "beloved",
        "the odyssey", "neuromancer", "the stranger", "middlemarch",
        "brave new world", "lolita", "catch-22", "ulysses", "the trial",
    ],
    "object_type": ["book", "novel", "textbook", "essay", "saga", "chronicle"],
    "object_select": ["this", "the current", "that", "the previous"],
    "rating_value": ["one", "two", "three", "four", "five", "0", "1", "2", "3", "4", "5", "six"],
    "best_rating": ["five", "6", "10", "5", "ten"],
    "rating_unit": ["stars", "points", "star"],
    "object_part_of_series_type": ["series", "saga", "trilogy"],
    "creative_object_type": ["movie", "tv show", "song", "album", "picture", "game", "trailer", "soundtrack", "painting", "video game"],
    "creative_object_name": [
        "the godfather", "breaking bad", "mad max", "the lion king",
        "black mirror", "inception", "the office", "friends", "halo",
        "star wars", "the wire", "fargo", "alien", "twin peaks", "frozen",
        "the sopranos", "casablanca", "jaws", "titanic", "sherlock",
    ],
    "movie_type": ["animated movies", "films", "movies", "movie times", "horror films"],
    "movie_name": [
        "the matrix", "jurassic park", "toy story", "avatar", "the birds",
        "up", "the fly", "heat", "vertigo", "psycho", "gravity", "coco",
        "arrival", "her", "tenet", "dunkirk", "parasite", "joker",
    ],
    "location_name": [
        "amc theatres", "regal cinemas", "cinemark", "landmark theatres",
        "the grand cinema", "loews", "century theatres", "the paramount",
    ],
    "object_location_type": ["movie house", "theatre", "cinema", "movie theatre"],
}

# Slot aliases so that templates can reuse a value pool under the SNIPS
# entity label. "{genre}" etc. map to the same pools.
ALIAS = {
    "object_type_creative": "creative_object_type",
    "object_name_creative": "creative_object_name",
}

TEMPLATES = {
    "AddToPlaylist": [
        "add {artist} to {playlist_owner} {playlist} playlist",
        "add this {music_item} to {playlist}",
        "put {artist} on {playlist_owner} {playlist} list",
        "add the {music_item} {track} to {playlist_owner} playlist {playlist}",
        "i want to add {track} by {artist} to {playlist}",
        "add {album} to the {playlist} playlist",
        "please add a {music_item} by {artist} to {playlist_owner} {playlist}",
        "can you put this {music_item} in {playlist}",
        "include {artist} in {playlist_owner} {playlist} collection",
        "add {track} to {playlist}",
        "save this {music_item} to {playlist_owner} {playlist}",
        "insert {artist} into the playlist {playlist}",
        "add some {artist} to {playlist_owner} playlist",
        "add {music_item} to {playlist_owner} {playlist} playlist please",
    ],
    "BookRestaurant": [
        "book a {restaurant_type} for {party_size_number} in {city}",
        "book a table at a {cuisine} {restaurant_type} {timeRange}",
        "reserve a {restaurant_type} for {party_size_number} people {timeRange}",
        "i need a table for {party_size_number} at a {restaurant_type} in {state}",
        "make a reservation at a {cuisine} {restaurant_type} {spatial_relation} {city}",
        "book a spot for {party_size_description} {timeRange}",
        "reserve a table for {party_size_number} {timeRange} in {country}",
        "book me a {restaurant_type} that serves {cuisine} food {timeRange}",
        "i want to book a {cuisine} {restaurant_type} for {party_size_number}",
        "find me a table for {party_size_description} at a {restaurant_type}",
        "table for {party_size_number} at a {restaurant_type} {spatial_relation} {current_location}",
        "book a {restaurant_type} in {city} {state} for {party_size_number}",
        "can i get a reservation for {party_size_number} {timeRange}",
        "reserve seats for {party_size_description} at a {cuisine} place",
    ],
    "GetWeather": [
        "what is the weather in {city} {timeRange}",
        "will it {condition_description} in {city} {timeRange}",
        "is it going to be {condition_temperature} in {state} {timeRange}",
        "what will the weather be like {timeRange} in {country}",
        "weather forecast for {city}",
        "tell me the forecast {spatial_relation} {current_location} {timeRange}",
        "will there be {condition_description} {timeRange}",
        "how {condition_temperature} will it be in {city} {timeRange}",
        "is it {condition_description} in {state}",
        "forecast for {timeRange} in {city} {country}",
        "what is the forecast for {current_location}",
        "will it be {condition_temperature} {timeRange} in {state}",
        "check the weather {spatial_relation} {city}",
        "how is the weather {timeRange}",
    ],
    "PlayMusic": [
        "play {artist}",
        "play some {genre} music",
        "play the {music_item} {track} by {artist}",
        "play {genre} on {service}",
        "i want to hear {artist} from {year}",
        "play the {sort} {music_item} by {artist}",
        "play {album} by {artist} on {service}",
        "put on some {genre}",
        "can you play {track}",
        "play a {music_item} from {year}",
        "start playing {artist} on {service}",
        "play me something by {artist}",
        "listen to {genre} from {year}",
        "play the {playlist} playlist on {service}",
    ],
    "RateBook": [
        "rate this {object_type} {rating_value} {rating_unit}",
        "give {object_name} {rating_value} out of {best_rating} {rating_unit}",
        "rate {object_select} {object_type} a {rating_value}",
        "i give {object_name} a rating of {rating_value} {rating_unit}",
        "rate {object_name} {rating_value} of {best_rating}",
        "give the current {object_part_of_series_type} {rating_value} {rating_unit}",
        "rate {object_select} {object_type} {rating_value} out of {best_rating}",
        "i would rate {object_name} {rating_value} {rating_unit}",
        "give this {object_type} a {rating_value}",
        "mark {object_name} as {rating_value} {rating_unit}",
        "rate {object_select} {object_part_of_series_type} a {rating_value} out of {best_rating}",
        "give {rating_value} {rating_unit} to {object_name}",
        "rate the {object_type} {object_name} {rating_value}",
        "my rating for {object_name} is {rating_value} {rating_unit}",
    ],
    "SearchCreativeWork": [
        "find the {object_type_creative} {object_name_creative}",
        "search for {object_name_creative}",
        "i am looking for the {object_type_creative} called {object_name_creative}",
        "show me the {object_type_creative} {object_name_creative}",
        "where can i find {object_name_creative} {object_type_creative}",
        "look up {object_name_creative}",
        "can you find me the {object_name_creative} {object_type_creative}",
        "search the {object_type_creative} {object_name_creative}",
        "i want to see the {object_type_creative} {object_name_creative}",
        "find a {object_type_creative} named {object_name_creative}",
        "get me the {object_name_creative} {object_type_creative}",
        "please look for {object_name_creative}",
        "help me find the {object_type_creative} {object_name_creative}",
        "where is the {object_type_creative} {object_name_creative}",
    ],
    "SearchScreeningEvent": [
        "what {movie_type} are playing {spatial_relation} {current_location}",
        "when is {movie_name} playing at {location_name}",
        "find {movie_type} at {location_name} {timeRange}",
        "show me the schedule for {movie_name} {timeRange}",
        "which {object_location_type} is showing {movie_name}",
        "what time is {movie_name} showing {timeRange}",
        "find me {movie_type} {spatial_relation} {current_location}",
        "is {movie_name} playing at the {object_location_type} {timeRange}",
        "i need showtimes for {movie_name} at {location_name}",
        "what {movie_type} are on at {location_name}",
        "find the closest {object_location_type} showing {movie_name}",
        "what is showing at {location_name} {timeRange}",
        "when can i watch {movie_name} in a {object_location_type}",
        "list {movie_type} showing {timeRange}",
    ],
}

ENTITY_LABEL = {
    "object_type_creative": "object_type",
    "object_name_creative": "object_name",
}

SLOT = re.compile(r"\{(\w+)\}")


def render(template, rng):
    text = ""
    entities = []
    pos = 0
    for m in SLOT.finditer(template):
        text += template[pos:m.start()]
        slot = m.group(1)
        pool = V[ALIAS.get(slot, slot)]
        value = rng.choice(pool)
        start = len(text)
        text += value
        entities.append({
            "start": start,
            "end": len(text),
            "value": value,
            "entity": ENTITY_LABEL.get(slot, slot),
        })
        pos = m.end()
    text += template[pos:]
    return text, entities


def to_markdown(examples):
    lines = []
    for intent in TEMPLATES:
        lines.append(f"## intent:{intent}")
        for ex in examples:
            if ex["intent"] != intent:
                continue
            out = ""
            pos = 0
            for ent in ex["entities"]:
                out += ex["text"][pos:ent["start"]]
                out += f"[{ex['text'][ent['start']:ent['end']]}]({ent['entity']})"
                pos = ent["end"]
            out += ex["text"][pos:]
            lines.append(f"- {out}")
        lines.append("")
    return "\n".join(lines)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=2019)
    ap.add_argument("--per-intent", type=int, default=100)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()

    rng = random.Random(args.seed)
    examples = []
    for intent, templates in TEMPLATES.items():
        seen = set()
        while len([e for e in examples if e["intent"] == intent]) < args.per_intent:
            text, entities = render(rng.choice(templates), rng)
            if text in seen:
                continue
            seen.add(text)
            examples.append({"text": text, "intent": intent, "entities": entities})

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = {"rasa_nlu_data": {"common_examples": examples}}
    (out / "snips_subset.json").write_text(json.dumps(doc, indent=2) + "\n")
    (out / "snips_subset.md").write_text(to_markdown(examples))


if __name__ == "__main__":
    main()
