"""Default synthetic scenario catalog.

Eighteen home-assistant scenarios with scenario-specific actions and entity
types. Templates reference entity slots as ``{entity_type}``. Action names and
entity types are unique across scenarios; a handful of function words
("please", "what", "the", ...) are shared so the corpus has general speech too.
Frequencies decay roughly like a Zipf law, in a non-alphabetical order.
"""

DEFAULT_CATALOG = {
    "calendar": {
        "frequency": 1.00,
        "entities": {
            "event_name": ["meeting", "dentist", "lunch", "yoga class", "team sync"],
            "date": ["monday", "tuesday", "friday", "tomorrow", "next week"],
        },
        "actions": {
            "schedule": ["add {event_name} to my calendar on {date}",
                         "please schedule {event_name} for {date}",
                         "put {event_name} on {date}"],
            "lookup": ["what is on my calendar {date}",
                       "do i have anything {date}",
                       "when is my {event_name}"],
            "cancel_event": ["cancel my {event_name} on {date}",
                             "please remove {event_name} from the calendar"],
        },
    },
    "play": {
        "frequency": 0.74,
        "entities": {
            "media_type": ["podcast", "audiobook", "radio", "game"],
            "station_name": ["jazz fm", "bbc one", "kiss radio", "classic hits"],
        },
        "actions": {
            "start_media": ["play the {media_type} please", "start {station_name}",
                            "can you play some {media_type}"],
            "resume_media": ["continue the {media_type} from where i stopped",
                             "resume {station_name}"],
            "play_game": ["let us play a game", "i want to play a {media_type} with you"],
        },
    },
    "qa": {
        "frequency": 0.61,
        "entities": {
            "definition_word": ["gravity", "democracy", "photosynthesis", "entropy"],
            "currency_name": ["dollars", "euros", "pounds", "yen"],
        },
        "actions": {
            "define": ["what does {definition_word} mean", "define {definition_word} for me"],
            "convert_currency": ["how many {currency_name} is ten {currency_name}",
                                 "what is the rate for {currency_name}"],
            "factoid": ["how tall is the tallest mountain", "who invented the telephone",
                        "tell me a fact about {definition_word}"],
        },
    },
    "email": {
        "frequency": 0.53,
        "entities": {
            "person": ["john", "mary", "alice", "bob", "my boss"],
            "email_folder": ["inbox", "spam folder", "drafts"],
        },
        "actions": {
            "send_email": ["send an email to {person}", "email {person} that i am late"],
            "check_email": ["check my {email_folder}", "any new email from {person}",
                            "read the {email_folder} please"],
            "reply_email": ["reply to {person}", "answer the last email from {person}"],
        },
    },
    "iot": {
        "frequency": 0.47,
        "entities": {
            "device_type": ["lights", "vacuum", "heater", "coffee machine", "plug"],
            "house_place": ["kitchen", "bedroom", "living room", "garage"],
        },
        "actions": {
            "lights_on": ["turn on the {device_type} in the {house_place}",
                          "switch the {house_place} {device_type} on"],
            "lights_off": ["turn off the {device_type}", "switch off the {house_place} {device_type}"],
            "cleaning": ["start the vacuum in the {house_place}", "clean the {house_place} please"],
            "hue_dim": ["dim the {device_type} in the {house_place}", "make the {house_place} darker"],
        },
    },
    "general": {
        "frequency": 0.42,
        "entities": {
            "joke_type": ["funny", "silly", "dad", "knock knock"],
        },
        "actions": {
            "joke": ["tell me a {joke_type} joke", "make me laugh with a {joke_type} joke"],
            "greet": ["hello there", "good morning assistant", "hi how are you"],
            "repeat": ["say that again", "repeat the last thing please"],
        },
    },
    "weather": {
        "frequency": 0.38,
        "entities": {
            "weather_descriptor": ["rain", "snow", "sunny", "windy"],
            "place_name": ["london", "paris", "rome", "berlin", "boston"],
        },
        "actions": {
            "forecast": ["what is the weather in {place_name}",
                         "weather forecast for {place_name} please"],
            "condition_check": ["will it {weather_descriptor} in {place_name}",
                                "is it {weather_descriptor} outside"],
        },
    },
    "transport": {
        "frequency": 0.35,
        "entities": {
            "transport_type": ["train", "taxi", "bus", "uber"],
            "transport_destination": ["airport", "station", "downtown", "the office"],
        },
        "actions": {
            "book_taxi": ["book a {transport_type} to the {transport_destination}",
                          "get me a {transport_type} please"],
            "ticket": ["buy a {transport_type} ticket to {transport_destination}",
                       "i need a ticket for the {transport_type}"],
            "traffic": ["how is the traffic to {transport_destination}",
                        "is the road to {transport_destination} busy"],
        },
    },
    "lists": {
        "frequency": 0.32,
        "entities": {
            "list_name": ["shopping list", "todo list", "packing list"],
            "list_item": ["milk", "bread", "eggs", "batteries", "sunscreen"],
        },
        "actions": {
            "add_item": ["add {list_item} to my {list_name}", "put {list_item} on the {list_name}"],
            "remove_item": ["remove {list_item} from my {list_name}",
                            "take {list_item} off the {list_name}"],
            "read_list": ["read my {list_name}", "what is on the {list_name}"],
        },
    },
    "news": {
        "frequency": 0.30,
        "entities": {
            "news_topic": ["sports", "politics", "technology", "business"],
            "media_source": ["bbc", "reuters", "cnn", "the guardian"],
        },
        "actions": {
            "headlines": ["what are the {news_topic} headlines",
                          "latest news from {media_source}"],
            "subscribe_news": ["subscribe me to {news_topic} news from {media_source}",
                               "follow {media_source} updates"],
        },
    },
    "recommendation": {
        "frequency": 0.28,
        "entities": {
            "business_type": ["restaurant", "cinema", "museum", "bakery"],
            "cuisine": ["italian", "thai", "mexican", "indian"],
        },
        "actions": {
            "suggest_place": ["recommend a good {business_type} nearby",
                              "where is a nice {cuisine} {business_type}"],
            "suggest_movie": ["recommend a movie for tonight", "suggest a film to watch"],
            "events": ["any interesting events near me", "what is happening at the {business_type}"],
        },
    },
    "alarm": {
        "frequency": 0.26,
        "entities": {
            "time": ["six am", "seven thirty", "noon", "eight pm"],
            "alarm_label": ["workout", "medicine", "wake up"],
        },
        "actions": {
            "set_alarm": ["wake me up at {time}", "set an alarm for {time}",
                          "set a {alarm_label} alarm at {time}"],
            "snooze": ["snooze the alarm", "give me ten more minutes"],
            "remove_alarm": ["delete my {alarm_label} alarm", "cancel the alarm at {time}"],
        },
    },
    "music": {
        "frequency": 0.24,
        "entities": {
            "music_genre": ["jazz", "rock", "pop", "classical"],
            "artist_name": ["adele", "queen", "mozart", "beyonce"],
        },
        "actions": {
            "likeness": ["i like {music_genre}", "i love songs by {artist_name}",
                         "remember that i enjoy {music_genre}"],
            "dislikeness": ["i hate {music_genre}", "never play {artist_name} again"],
            "settings": ["turn on shuffle", "repeat this song"],
        },
    },
    "datetime": {
        "frequency": 0.22,
        "entities": {
            "timezone": ["tokyo", "sydney", "new york", "dubai"],
        },
        "actions": {
            "query_time": ["what time is it", "what time is it in {timezone}",
                           "tell me the current time in {timezone}"],
            "convert_time": ["convert five pm to {timezone} time",
                             "what is noon here in {timezone}"],
        },
    },
    "social": {
        "frequency": 0.21,
        "entities": {
            "social_platform": ["twitter", "facebook", "instagram"],
            "complaint_target": ["the airline", "my bank", "the hotel"],
        },
        "actions": {
            "post": ["post this on {social_platform}", "share my photo on {social_platform}"],
            "complain": ["complain to {complaint_target} on {social_platform}",
                         "write a complaint to {complaint_target}"],
        },
    },
    "cooking": {
        "frequency": 0.20,
        "entities": {
            "food_type": ["pasta", "pancakes", "curry", "soup", "salad"],
        },
        "actions": {
            "recipe": ["how do i make {food_type}", "give me a recipe for {food_type}"],
            "ingredients": ["what goes into {food_type}", "list the ingredients for {food_type}"],
        },
    },
    "audio": {
        "frequency": 0.19,
        "entities": {
            "change_amount": ["a bit", "a lot", "to maximum", "by half"],
        },
        "actions": {
            "volume_up": ["turn the volume up {change_amount}", "louder {change_amount}"],
            "volume_mute": ["mute the speaker", "be quiet now"],
            "volume_down": ["turn the volume down {change_amount}", "quieter please"],
        },
    },
    "takeaway": {
        "frequency": 0.18,
        "entities": {
            "restaurant_name": ["pizza hut", "dominos", "burger king", "wagamama"],
            "order_type": ["delivery", "pickup"],
        },
        "actions": {
            "order": ["order food from {restaurant_name}",
                      "i want a {order_type} from {restaurant_name}"],
            "order_status": ["where is my {order_type}", "check my order from {restaurant_name}"],
        },
    },
}
