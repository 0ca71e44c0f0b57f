//! Bundled English word tables used by document preparation.

/// Base stop list: common English function words plus chat pleasantries.
pub static STOP_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "ain", "all", "am", "an", "and", "any",
    "are", "aren", "as", "at", "be", "because", "been", "before", "being", "below", "between",
    "both", "but", "by", "can", "couldn", "d", "did", "didn", "do", "does", "doesn", "doing",
    "don", "down", "during", "each", "few", "for", "from", "further", "had", "hadn", "has",
    "hasn", "have", "haven", "having", "he", "her", "here", "hers", "herself", "him", "himself",
    "his", "how", "i", "if", "in", "into", "is", "isn", "it", "its", "itself", "just", "ll", "m",
    "ma", "me", "mightn", "more", "most", "mustn", "my", "myself", "needn", "no", "nor", "not",
    "now", "o", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves",
    "out", "over", "own", "re", "s", "same", "shan", "she", "should", "shouldn", "so", "some",
    "such", "t", "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there",
    "these", "they", "this", "those", "through", "to", "too", "under", "until", "up", "ve",
    "very", "was", "wasn", "we", "were", "weren", "what", "when", "where", "which", "while",
    "who", "whom", "why", "will", "with", "won", "wouldn", "y", "you", "your", "yours",
    "yourself", "yourselves",
    // extended: conversational filler and courtesy words
    "able", "absolutely", "across", "actually", "afternoon", "ahead", "alright", "already",
    "also", "although", "always", "among", "another", "anybody", "anyone", "anything",
    "anyway", "anywhere", "appreciate", "around", "assist", "assistance", "away", "awesome",
    "basically", "become", "behalf", "besides", "better", "beyond", "bye", "certainly",
    "chat", "cheers", "come", "could", "currently", "day", "dear", "definitely", "done",
    "either", "else", "enough", "even", "evening", "ever", "every", "everybody", "everyone",
    "everything", "exactly", "fine", "first", "following", "former", "glad", "goes", "going",
    "gone", "good", "goodbye", "got", "gotten", "great", "greetings", "happy", "hello",
    "help", "helpful", "hence", "hey", "hi", "hmm", "hope", "however", "inside", "instead",
    "just", "kind", "kindly", "know", "later", "least", "less", "let", "like", "likely",
    "little", "look", "looking", "made", "make", "many", "may", "maybe", "meanwhile", "might",
    "mine", "minute", "moment", "morning", "much", "must", "name", "nearly", "need", "needs",
    "never", "nice", "nobody", "none", "nothing", "noted", "okay", "ok", "one", "others",
    "otherwise", "outside", "perfect", "perhaps", "please", "pleasure", "pretty", "probably",
    "quite", "rather", "really", "regarding", "right", "said", "say", "second", "see",
    "seems", "shall", "since", "something", "sometimes", "somewhere", "soon", "sorry",
    "still", "sure", "surely", "take", "tell", "thank", "thanks", "thing", "things", "though",
    "thus", "today's", "together", "toward", "towards", "truly", "trying", "understand",
    "unless", "upon", "usually", "want", "wanted", "way", "welcome", "well", "whatever",
    "whenever", "whether", "within", "without", "wonderful", "would", "yeah", "yes", "yet",
];

/// Contraction and chat shorthand expansions, keyed by lowercase surface form.
pub static CONTRACTIONS: &[(&str, &str)] = &[
    ("ain't", "am not"),
    ("aren't", "are not"),
    ("can't", "can not"),
    ("can't've", "can not have"),
    ("cannot", "can not"),
    ("'cause", "because"),
    ("could've", "could have"),
    ("couldn't", "could not"),
    ("couldn't've", "could not have"),
    ("didn't", "did not"),
    ("doesn't", "does not"),
    ("don't", "do not"),
    ("hadn't", "had not"),
    ("hadn't've", "had not have"),
    ("hasn't", "has not"),
    ("haven't", "have not"),
    ("he'd", "he would"),
    ("he'd've", "he would have"),
    ("he'll", "he will"),
    ("he's", "he is"),
    ("here's", "here is"),
    ("how'd", "how did"),
    ("how'd'y", "how do you"),
    ("how'll", "how will"),
    ("how's", "how is"),
    ("i'd", "i would"),
    ("i'd've", "i would have"),
    ("i'll", "i will"),
    ("i'll've", "i will have"),
    ("i'm", "i am"),
    ("i've", "i have"),
    ("isn't", "is not"),
    ("it'd", "it would"),
    ("it'd've", "it would have"),
    ("it'll", "it will"),
    ("it's", "it is"),
    ("let's", "let us"),
    ("ma'am", "madam"),
    ("mayn't", "may not"),
    ("might've", "might have"),
    ("mightn't", "might not"),
    ("must've", "must have"),
    ("mustn't", "must not"),
    ("needn't", "need not"),
    ("o'clock", "of the clock"),
    ("oughtn't", "ought not"),
    ("shan't", "shall not"),
    ("sha'n't", "shall not"),
    ("she'd", "she would"),
    ("she'd've", "she would have"),
    ("she'll", "she will"),
    ("she's", "she is"),
    ("should've", "should have"),
    ("shouldn't", "should not"),
    ("shouldn't've", "should not have"),
    ("so've", "so have"),
    ("that'd", "that would"),
    ("that'd've", "that would have"),
    ("that's", "that is"),
    ("there'd", "there would"),
    ("there'd've", "there would have"),
    ("there's", "there is"),
    ("they'd", "they would"),
    ("they'd've", "they would have"),
    ("they'll", "they will"),
    ("they're", "they are"),
    ("they've", "they have"),
    ("to've", "to have"),
    ("wasn't", "was not"),
    ("we'd", "we would"),
    ("we'd've", "we would have"),
    ("we'll", "we will"),
    ("we're", "we are"),
    ("we've", "we have"),
    ("weren't", "were not"),
    ("what'll", "what will"),
    ("what're", "what are"),
    ("what's", "what is"),
    ("what've", "what have"),
    ("when's", "when is"),
    ("when've", "when have"),
    ("where'd", "where did"),
    ("where's", "where is"),
    ("where've", "where have"),
    ("who'll", "who will"),
    ("who's", "who is"),
    ("who've", "who have"),
    ("why's", "why is"),
    ("why've", "why have"),
    ("will've", "will have"),
    ("won't", "will not"),
    ("won't've", "will not have"),
    ("would've", "would have"),
    ("wouldn't", "would not"),
    ("wouldn't've", "would not have"),
    ("y'all", "you all"),
    ("y'all're", "you all are"),
    ("y'all've", "you all have"),
    ("you'd", "you would"),
    ("you'd've", "you would have"),
    ("you'll", "you will"),
    ("you'll've", "you will have"),
    ("you're", "you are"),
    ("you've", "you have"),
    ("gonna", "going to"),
    ("wanna", "want to"),
    ("gotta", "got to"),
    ("dunno", "do not know"),
    ("lemme", "let me"),
    ("gimme", "give me"),
    ("kinda", "kind of"),
    ("sorta", "sort of"),
    ("outta", "out of"),
    ("u", "you"),
    ("ur", "your"),
    ("pls", "please"),
    ("plz", "please"),
    ("thx", "thanks"),
    ("ty", "thank you"),
    ("idk", "i do not know"),
    ("btw", "by the way"),
    ("asap", "as soon as possible"),
    ("acct", "account"),
    ("pwd", "password"),
];

/// Irregular inflections the suffix rules would get wrong.
pub static LEMMA_EXCEPTIONS: &[(&str, &str)] = &[
    ("children", "child"),
    ("people", "person"),
    ("men", "man"),
    ("women", "woman"),
    ("feet", "foot"),
    ("teeth", "tooth"),
    ("mice", "mouse"),
    ("paid", "pay"),
    ("bought", "buy"),
    ("brought", "bring"),
    ("thought", "think"),
    ("taught", "teach"),
    ("caught", "catch"),
    ("sought", "seek"),
    ("went", "go"),
    ("gone", "go"),
    ("made", "make"),
    ("said", "say"),
    ("sent", "send"),
    ("spent", "spend"),
    ("built", "build"),
    ("received", "receive"),
    ("charged", "charge"),
    ("changed", "change"),
    ("arranged", "arrange"),
    ("cancelled", "cancel"),
    ("canceled", "cancel"),
    ("cancelling", "cancel"),
    ("canceling", "cancel"),
    ("billing", "billing"),
    ("shipping", "shipping"),
    ("setting", "setting"),
    ("settings", "setting"),
    ("meeting", "meeting"),
    ("morning", "morning"),
    ("evening", "evening"),
    ("something", "something"),
    ("nothing", "nothing"),
    ("during", "during"),
    ("anything", "anything"),
    ("everything", "everything"),
    ("business", "business"),
    ("address", "address"),
    ("status", "status"),
    ("series", "series"),
    ("species", "species"),
    ("analyses", "analysis"),
    ("devices", "device"),
    ("services", "service"),
    ("invoices", "invoice"),
    ("prices", "price"),
    ("issues", "issue"),
    ("packages", "package"),
    ("messages", "message"),
    ("outages", "outage"),
    ("charges", "charge"),
    ("refunded", "refund"),
    ("working", "work"),
    ("running", "run"),
    ("stopped", "stop"),
    ("dropped", "drop"),
    ("upgraded", "upgrade"),
    ("updated", "update"),
    ("activated", "activate"),
    ("routers", "router"),
];

/// Words that should never pass the part-of-speech filter: adverbs, pronouns,
/// interjections and other closed-class words not already on the stop list.
pub static NON_CONTENT_WORDS: &[&str] = &[
    "abroad", "accordingly", "afterwards", "again", "almost", "alone", "along", "altogether",
    "amongst", "anyhow", "anymore", "apart", "aside", "backwards", "barely", "beforehand",
    "behind", "beneath", "beside", "between", "briefly", "clearly", "completely",
    "constantly", "earlier", "elsewhere", "entirely", "especially", "essentially",
    "eventually", "everywhere", "evidently", "exactly", "extremely", "finally", "forward",
    "frankly", "fully", "further", "furthermore", "generally", "gladly", "hardly", "hereby",
    "herein", "highly", "honestly", "hopefully", "immediately", "indeed", "initially",
    "lately", "likewise", "literally", "mainly", "merely", "moreover", "mostly", "namely",
    "nevertheless", "nonetheless", "normally", "obviously", "often", "onto", "originally",
    "overall", "particularly", "possibly", "previously", "properly", "quickly", "randomly",
    "rarely", "readily", "recently", "regardless", "seriously", "shortly", "simply",
    "slightly", "somebody", "somehow", "someone", "somewhat", "specifically", "suddenly",
    "therefore", "thereby", "throughout", "tomorrow's", "totally", "twice", "typically",
    "ultimately", "unfortunately", "whereas", "wherever", "whoever", "whole", "whose",
    "wow", "yesterday's", "yourself", "anyways", "thereafter", "thanks", "whom",
];

/// Words ending in "ly" that are nouns or adjectives, exempt from the adverb heuristic.
pub static LY_CONTENT_WORDS: &[&str] = &[
    "anomaly", "apply", "assembly", "bully", "daily", "early", "family", "friendly", "holy",
    "hourly", "italy", "jelly", "july", "likely", "lonely", "lovely", "monthly", "only",
    "quarterly", "rally", "reply", "supply", "ugly", "unlikely", "weekly", "yearly",
];
