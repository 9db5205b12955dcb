/// English stopword list (NLTK's list, apostrophe forms dropped).
const STOPWORDS: &[&str] = &[
    "about", "above", "after", "again", "against", "ain", "all", "am", "an", "and", "any", "are", "aren", "as", "at",
    "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "couldn", "did",
    "didn", "do", "does", "doesn", "doing", "don", "down", "during", "each", "few", "for", "from", "further", "had",
    "hadn", "has", "hasn", "have", "haven", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his",
    "how", "if", "in", "into", "is", "isn", "it", "its", "itself", "just", "ll", "ma", "me", "mightn", "more", "most",
    "mustn", "my", "myself", "needn", "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other",
    "our", "ours", "ourselves", "out", "over", "own", "re", "same", "shan", "she", "should", "shouldn", "so", "some",
    "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this",
    "those", "through", "to", "too", "under", "until", "up", "ve", "very", "was", "wasn", "we", "were", "weren",
    "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with", "won", "wouldn", "you", "your",
    "yours", "yourself", "yourselves",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Lower-cased alphanumeric runs of at least two characters, minus stopwords.
pub fn tokenize(title: &str, abstract_text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for text in [title, abstract_text] {
        for raw in text.split(|c: char| !c.is_alphanumeric()) {
            if raw.chars().count() < 2 {
                continue;
            }
            let token = raw.to_lowercase();
            if !is_stopword(&token) {
                out.push(token);
            }
        }
    }
    out
}
