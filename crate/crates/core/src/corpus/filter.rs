use super::Document;

/// Keywords marking a document as COVID-related (lowercase substring match).
pub const COVID_KEYWORDS: [&str; 7] = [
    "covid-19",
    "coronavirus",
    "cov-2",
    "sars-cov-2",
    "sars-cov",
    "hcov",
    "2019-ncov",
];

pub fn is_covid_related(doc: &Document) -> bool {
    [&doc.title, &doc.abstract_text, &doc.body].iter().any(|field| {
        let lower = field.to_lowercase();
        COVID_KEYWORDS.iter().any(|k| lower.contains(k))
    })
}

/// Order-preserving subset of `docs` that mention a COVID keyword.
pub fn filter_covid_docs(docs: &[Document]) -> Vec<Document> {
    docs.iter().filter(|d| is_covid_related(d)).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyword_in_title_kept() {
        let docs = vec![
            Document::new("a", "SARS-CoV-2 outcomes"),
            Document::new("b", "Influenza vaccination"),
            Document::new("c", "Other").with_body("seen in HCoV-229E carriers"),
        ];
        let kept: Vec<_> = filter_covid_docs(&docs).into_iter().map(|d| d.doc_id).collect();
        assert_eq!(kept, ["a", "c"]);
    }

    #[test]
    fn plain_sars_is_not_a_keyword() {
        assert!(!is_covid_related(&Document::new("x", "SARS in 2003")));
        assert!(is_covid_related(&Document::new("x", "SARS-CoV in 2003")));
    }
}
