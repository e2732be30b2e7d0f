//! Hand-checked medical plurals and inflections.

use medchat_core::corpus::Lemmatizer;

const GOLD: &[(&str, &str)] = &[
    ("fevers", "fever"),
    ("Fevers", "fever"),
    ("coughs", "cough"),
    ("coughing", "cough"),
    ("coughed", "cough"),
    ("headaches", "headache"),
    ("stomachaches", "stomachache"),
    ("symptoms", "symptom"),
    ("patients", "patient"),
    ("infections", "infection"),
    ("infected", "infect"),
    ("diseases", "disease"),
    ("studies", "study"),
    ("studied", "study"),
    ("therapies", "therapy"),
    ("allergies", "allergy"),
    ("vomiting", "vomit"),
    ("vomited", "vomit"),
    ("chills", "chill"),
    ("rashes", "rash"),
    ("illnesses", "illness"),
    ("viruses", "virus"),
    ("coronaviruses", "coronavirus"),
    ("diagnoses", "diagnosis"),
    ("analyses", "analysis"),
    ("hospitalized", "hospitalize"),
    ("vaccinated", "vaccinate"),
    ("treated", "treat"),
    ("treating", "treat"),
    ("treatments", "treatment"),
    ("reported", "report"),
    ("developed", "develop"),
    ("developing", "develop"),
    ("swelling", "swell"),
    ("running", "run"),
    ("stopped", "stop"),
    ("taking", "take"),
    ("took", "take"),
    ("aching", "ache"),
    ("breathing", "breathe"),
    ("reduced", "reduce"),
    ("producing", "produce"),
    ("days", "day"),
    ("weeks", "week"),
    ("tablets", "tablet"),
    ("doses", "dose"),
    ("capsules", "capsule"),
    ("children", "child"),
    ("pneumonias", "pneumonia"),
    ("sepsis", "sepsis"),
    ("diabetes", "diabetes"),
    ("fever", "fever"),
    ("dyspnea", "dyspnea"),
    ("nurses", "nurse"),
    ("associated", "associate"),
];

#[test]
fn gold_list_of_medical_inflections() {
    let lemmatizer = Lemmatizer::bundled();
    assert!(GOLD.len() >= 50);
    let failures: Vec<String> = GOLD
        .iter()
        .filter_map(|&(word, want)| {
            let got = lemmatizer.lemma(word);
            (got != want).then(|| format!("{word}: got {got}, want {want}"))
        })
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn gold_list_is_idempotent() {
    let lemmatizer = Lemmatizer::bundled();
    for &(word, _) in GOLD {
        let once = lemmatizer.lemma(word);
        assert_eq!(lemmatizer.lemma(&once), once, "{word}");
    }
}
