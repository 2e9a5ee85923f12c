/** Criteria texts shown verbatim to annotators. */

export const KEYWORD_CRITERIA = {
  interpretability: {
    good: "good: eight to ten words are related to each other",
    neutral: "neutral: four to seven words are related",
    bad: "bad: at most three words are related",
  },
  usefulness: {
    useful:
      "useful: a short label describing the topic is easy to assign and " +
      "would help a crisis manager",
    average: "average: a label is assignable but of limited use",
    useless: "useless: no helpful label can be assigned",
  },
};

export const CLUSTER_CRITERIA = {
  interpretability: {
    good:
      "good: 3-4 tweets seem to be part of a coherent topic beyond " +
      "“snowstorm”",
    neutral: "neutral: some tweets seem related",
    bad:
      "bad: no tweets seem to be part of a coherent topic beyond " +
      "“snowstorm”",
  },
  usefulness: {
    useful:
      "useful: the cluster would help a crisis manager filter information " +
      "during a crisis",
    useless: "useless: the cluster would not help filter information",
  },
  intruder:
    "One of the five tweets comes from outside this topic. Pick the " +
    "intruder, or “unsure” rather than guessing.",
};
