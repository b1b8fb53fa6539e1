"""Knowledge-graph embeddings over Wikidata triples.

Pipeline: extract item-property-item triples from an N-Triples dump, treat
each triple as a 3-token sentence, train a CBOW / skip-gram embedding with
negative sampling, then query nearest neighbors and pairwise similarity
locally or over the bundled REST API.
"""

__version__ = "0.1.0"
