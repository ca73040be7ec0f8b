"""
File: generators.py
Description: Text generators of the pseudo-OOD nodes.

A generator receives, for one pseudo node, the IND class names, the labels
of its IND neighbors and the generation mode, and returns a
GeneratedText. Three generators share this interface:

    TemplateGenerator     offline deterministic stand-in for a language model
    RandomTextGenerator   neighbor-agnostic random texts (ablation)
    RemoteLLMGenerator    four-turn conversation with a chat-completion service
"""

from loguru import logger

from ..common.errors import GenerationError, RemoteServiceError
from ..encoders.text_encoder import tokenize
from ..remote import JsonHttpClient
from ..utils.seeding import stage_rng
from .prompt import build_cot_prompt, last_line

TOKEN_VARIABLE = 'LECT_LLM_TOKEN'

DOMAINS = [
    ('computer science', {
        'keywords': {'learning', 'neural', 'network', 'networks',
                     'algorithm', 'algorithms', 'theory', 'database',
                     'databases', 'programming', 'computing', 'retrieval',
                     'vision', 'robotics', 'agents', 'software', 'data',
                     'reinforcement', 'probabilistic', 'methods', 'rule'},
        'adjacent': {
            'Evolutionary Computation': ('evolutionary', 'population',
                                         'mutation', 'crossover', 'fitness',
                                         'selection'),
            'Swarm Intelligence': ('swarm', 'particle', 'colony', 'pheromone',
                                   'population', 'fitness'),
            'Artificial Life': ('organism', 'survival', 'population',
                                'replication', 'ecosystem', 'emergence'),
            'Reinforcement Learning': ('reward', 'policy', 'agent',
                                       'exploration', 'action', 'discount'),
            'Rule Learning': ('rule', 'induction', 'clause', 'coverage',
                              'pruning', 'decision'),
            'Case Based Reasoning': ('case', 'retrieval', 'similarity',
                                     'reuse', 'memory', 'analogy'),
            'Quantum Computing': ('qubit', 'entanglement', 'superposition',
                                  'gate', 'circuit', 'decoherence'),
            'Computer Vision': ('image', 'pixel', 'segmentation', 'object',
                                'scene', 'stereo'),
            'Signal Processing': ('frequency', 'filter', 'spectrum', 'noise',
                                  'wavelet', 'modulation'),
            'Cryptography': ('cipher', 'encryption', 'key', 'protocol',
                             'attack', 'signature'),
        },
        'distant': {
            'Medieval History': ('castle', 'monarchy', 'crusade', 'feudal',
                                 'manuscript', 'chronicle'),
            'Culinary Arts': ('sauce', 'pastry', 'flavor', 'kitchen',
                              'seasoning', 'braising'),
            'Marine Biology': ('coral', 'reef', 'plankton', 'whale', 'tide',
                               'estuary'),
            'Renaissance Painting': ('fresco', 'canvas', 'pigment',
                                     'portrait', 'patron', 'chiaroscuro'),
            'Football Tactics': ('striker', 'midfield', 'pressing',
                                 'formation', 'goalkeeper', 'offside'),
            'Opera': ('aria', 'soprano', 'libretto', 'orchestra', 'tenor',
                      'overture'),
            'Gardening': ('soil', 'compost', 'seedling', 'mulch', 'perennial',
                          'hedge'),
            'Fashion Design': ('fabric', 'runway', 'textile', 'tailoring',
                               'silhouette', 'couture'),
        },
    }),
    ('biomedicine', {
        'keywords': {'diabetes', 'cancer', 'gene', 'genetics', 'disease',
                     'clinical', 'medicine', 'protein', 'cell', 'cells',
                     'experimental', 'therapy', 'patients'},
        'adjacent': {
            'Epidemiology': ('outbreak', 'incidence', 'cohort', 'transmission',
                             'prevalence', 'surveillance'),
            'Pharmacology': ('dosage', 'compound', 'receptor', 'toxicity',
                             'metabolism', 'trial'),
            'Immunology': ('antibody', 'antigen', 'lymphocyte', 'vaccine',
                           'cytokine', 'inflammation'),
            'Neuroscience': ('synapse', 'cortex', 'hippocampus', 'axon',
                             'plasticity', 'dopamine'),
            'Nutrition Science': ('vitamin', 'diet', 'calorie', 'nutrient',
                                  'fiber', 'intake'),
            'Veterinary Medicine': ('livestock', 'canine', 'feline',
                                    'zoonotic', 'herd', 'equine'),
        },
        'distant': {
            'Astrophysics': ('galaxy', 'nebula', 'redshift', 'telescope',
                             'quasar', 'orbit'),
            'Jazz Music': ('saxophone', 'improvisation', 'swing', 'trumpet',
                           'bebop', 'rhythm'),
            'Architecture': ('facade', 'column', 'vault', 'blueprint', 'arch',
                             'courtyard'),
            'Poetry': ('stanza', 'rhyme', 'sonnet', 'verse', 'meter',
                       'metaphor'),
            'Tax Law': ('deduction', 'audit', 'revenue', 'liability',
                        'exemption', 'statute'),
            'Sailing': ('hull', 'mast', 'keel', 'regatta', 'rigging',
                        'harbor'),
        },
    }),
    ('consumer electronics', {
        'keywords': {'camera', 'cameras', 'photo', 'lenses', 'lens',
                     'electronics', 'accessories', 'flashes', 'tripods',
                     'video', 'digital', 'film', 'bags'},
        'adjacent': {
            'Audio Equipment': ('speaker', 'amplifier', 'headphones', 'woofer',
                                'stereo', 'equalizer'),
            'Smartphones': ('touchscreen', 'battery', 'charger', 'processor',
                            'apps', 'cellular'),
            'Drones': ('propeller', 'gimbal', 'quadcopter', 'flight',
                       'altitude', 'controller'),
            'Telescopes': ('eyepiece', 'aperture', 'mount', 'refractor',
                           'magnification', 'finder'),
            'Printers': ('toner', 'cartridge', 'inkjet', 'scanner', 'duplex',
                         'laser'),
            'Gaming Consoles': ('joystick', 'gamepad', 'multiplayer',
                                'console', 'controller', 'handheld'),
        },
        'distant': {
            'Pet Food': ('kibble', 'treats', 'puppy', 'kitten', 'grain',
                         'chew'),
            'Garden Furniture': ('bench', 'parasol', 'hammock', 'teak',
                                 'cushion', 'patio'),
            'Cookware': ('skillet', 'saucepan', 'wok', 'nonstick', 'lid',
                         'casserole'),
            'Cosmetics': ('lipstick', 'mascara', 'foundation', 'blush',
                          'serum', 'moisturizer'),
            'Children Books': ('fairy', 'picture', 'bedtime', 'tale', 'rhyme',
                               'illustration'),
            'Sports Nutrition': ('protein', 'electrolyte', 'recovery',
                                 'creatine', 'hydration', 'bar'),
        },
    }),
]

GENERAL_DOMAIN = ('general knowledge', {
    'keywords': set(),
    'adjacent': {
        'Interdisciplinary Studies': ('collaboration', 'boundary', 'synthesis',
                                      'integration', 'perspective',
                                      'framework'),
        'Applied Science': ('application', 'prototype', 'measurement',
                            'engineering', 'testing', 'deployment'),
        'Engineering Practice': ('specification', 'tolerance', 'maintenance',
                                 'safety', 'standard', 'workflow'),
        'Education Research': ('curriculum', 'classroom', 'learner',
                               'assessment', 'pedagogy', 'teacher'),
    },
    'distant': {
        'Cooking': ('recipe', 'oven', 'spice', 'dough', 'simmer', 'grill'),
        'Travel': ('itinerary', 'passport', 'hostel', 'luggage',
                   'sightseeing', 'airport'),
        'Sports': ('league', 'stadium', 'referee', 'championship', 'athlete',
                   'score'),
        'Music': ('melody', 'chord', 'tempo', 'harmony', 'concert', 'guitar'),
        'Gardening': ('soil', 'compost', 'seedling', 'mulch', 'perennial',
                      'hedge'),
        'Fashion': ('fabric', 'runway', 'textile', 'tailoring', 'silhouette',
                    'couture'),
    },
})

SENTENCES = [
    "Entry about {category} covering {words}.",
    "Notes on {category} with a focus on {words}.",
    "{category} overview discussing {words}.",
    "Introduction to {category} presenting {words}.",
]

NEIGHBOR_SENTENCES = [
    "It is cited together with work on {labels}.",
    "Related entries deal with {labels}.",
    "It shares references with {labels}.",
]

TOPIC_WORDS_PER_TEXT = 4

EVERYDAY_WORDS = ['apple', 'river', 'glass', 'violin', 'harbor', 'lamp',
                  'mountain', 'pepper', 'ticket', 'carpet', 'engine',
                  'forest', 'candle', 'mirror', 'bicycle', 'island',
                  'meadow', 'pillow', 'thunder', 'velvet', 'window',
                  'orchard', 'saddle', 'lantern', 'marble', 'pebble',
                  'quartz', 'ribbon', 'shovel', 'tunnel', 'walnut',
                  'yogurt', 'anchor', 'blanket', 'cactus', 'dolphin']


def _topic_vocabulary():
    words = set(EVERYDAY_WORDS)
    for _, pools in DOMAINS + [GENERAL_DOMAIN]:
        for kind in ('adjacent', 'distant'):
            for topic in pools[kind].values():
                words.update(topic)
    return sorted(words)


# Every word a template text can name, plus everyday words.
RANDOM_VOCABULARY = _topic_vocabulary()


def detect_domain(ind_class_names):
    """Name and category pools of the domain matching the class names.

    Each pool maps a category name to the topic words a text about it uses.

    The domain whose keywords occur most often in the tokenized class
    names wins, ties going to the first one listed; no match at all gives
    the general domain.
    """
    tokens = [token for name in ind_class_names for token in tokenize(name)]
    best, best_score = GENERAL_DOMAIN, 0
    for domain in DOMAINS:
        score = sum(token in domain[1]['keywords'] for token in tokens)
        if score > best_score:
            best, best_score = domain, score
    return best


class GeneratedText(object):
    """Text of a pseudo node and how it was obtained.

    Attributes:
        text (str): The generated node text.
        category (str): The chosen OOD category.
        transcript (list): of chat messages, None for offline generators.

    """
    def __init__(self, text, category, transcript=None):
        self.text = text
        self.category = category
        self.transcript = transcript


class TextGenerator(object):
    """Abstract generator of pseudo-OOD texts.

    Args:
        seed (int): Seed of the generator.

    """
    def __init__(self, seed=0):
        self.seed = seed

    @property
    def generator_id(self):
        raise NotImplementedError('Abstract Class')

    def generate(self, node_id, ind_class_names, neighbor_labels, mode):
        """Generate the text of one pseudo node.

        Args:
            node_id (int): Id of the pseudo node.
            ind_class_names (list): of str, names of every IND class.
            neighbor_labels (list): of str, class names of its neighbors.
            mode (str): 'near' or 'far'.

        Returns:
            GeneratedText

        """
        raise NotImplementedError('Abstract Class')


class TemplateGenerator(TextGenerator):
    """Offline deterministic generator.

    Near nodes draw their category from the pool adjacent to the detected
    IND domain, far nodes from the distant pool; categories named like an
    IND class are never drawn. The text names the category, a few of its
    topic words and the neighbor labels. The output is a pure function of
    (seed, node id, neighbor labels, mode).
    """
    @property
    def generator_id(self):
        return 'template'

    def generate(self, node_id, ind_class_names, neighbor_labels, mode):
        # Same checks as the remote prompt.
        build_cot_prompt(ind_class_names, neighbor_labels, mode)
        _, pools = detect_domain(ind_class_names)
        kind = 'adjacent' if mode == 'near' else 'distant'
        excluded = {name.lower() for name in ind_class_names}
        pool = sorted(name for name in pools[kind]
                      if name.lower() not in excluded)
        if not pool:
            pools = GENERAL_DOMAIN[1]
            pool = sorted(name for name in pools[kind]
                          if name.lower() not in excluded)

        rng = stage_rng(self.seed, 'template', node_id)
        category = pool[int(rng.integers(len(pool)))]
        topic = pools[kind][category]
        words = list(rng.choice(topic, size=min(TOPIC_WORDS_PER_TEXT,
                                                len(topic)), replace=False))
        sentence = SENTENCES[int(rng.integers(len(SENTENCES)))]
        neighbor_sentence = NEIGHBOR_SENTENCES[
            int(rng.integers(len(NEIGHBOR_SENTENCES)))]

        text = " ".join([
            sentence.format(category=category,
                            words=", ".join(words[:-1]) + " and " + words[-1]),
            neighbor_sentence.format(labels=" and ".join(
                sorted(set(neighbor_labels))))])
        return GeneratedText(text, category)


class RandomTextGenerator(TextGenerator):
    """Neighbor-agnostic generator of the random-text ablation.

    Texts are drawn from a donor corpus (node texts of another dataset) when
    one is given, otherwise assembled from words drawn uniformly over every
    topic word of the template pools and a list of everyday words, with no
    category behind them.

    Args:
        seed (int): Seed of the generator.
        donor_texts (list): of str, optional donor corpus.
        nb_words (int): Words per text without a donor corpus.

    """
    def __init__(self, seed=0, donor_texts=None, nb_words=12):
        super().__init__(seed)
        self.donor_texts = [text for text in (donor_texts or []) if text.strip()]
        self.nb_words = nb_words

    @property
    def generator_id(self):
        return 'random-donor' if self.donor_texts else 'random'

    def generate(self, node_id, ind_class_names, neighbor_labels, mode):
        rng = stage_rng(self.seed, 'random_text', node_id)
        if self.donor_texts:
            text = self.donor_texts[int(rng.integers(len(self.donor_texts)))]
        else:
            text = " ".join(rng.choice(RANDOM_VOCABULARY, size=self.nb_words))
        return GeneratedText(text, 'random')


class RemoteLLMGenerator(TextGenerator):
    """Generator holding one four-turn conversation per pseudo node with a
    chat-completion endpoint.

    Every turn is answered before the next is sent. The chosen category is
    the last line of the third answer, the node text the last line of the
    fourth.

    Args:
        client (JsonHttpClient): Client of the chat-completion endpoint.
        model (str): Model requested from the endpoint.
        seed (int): Sent with the requests.

    """
    def __init__(self, client, model, seed=0):
        super().__init__(seed)
        self.client = client
        self.model = model

    @classmethod
    def from_config(cls, remote_cfg, seed=0):
        client = JsonHttpClient.from_env(remote_cfg.llm_endpoint,
                                         TOKEN_VARIABLE,
                                         max_retries=remote_cfg.max_retries,
                                         backoff_factor=remote_cfg.backoff_factor,
                                         timeout=remote_cfg.timeout)
        return cls(client, remote_cfg.llm_model, seed)

    @property
    def generator_id(self):
        return 'remote-llm:{}'.format(self.model)

    def _complete(self, node_id, messages):
        payload = {'model': self.model, 'messages': messages,
                   'seed': self.seed}
        try:
            answer = self.client.post_json(payload)
        except RemoteServiceError as e:
            raise GenerationError(str(e), node_id=node_id) from e
        try:
            content = answer['choices'][0]['message']['content']
        except (KeyError, IndexError, TypeError):
            raise GenerationError("malformed chat-completion answer",
                                  node_id=node_id)
        if not isinstance(content, str) or not content.strip():
            raise GenerationError("empty completion", node_id=node_id)
        return content

    def generate(self, node_id, ind_class_names, neighbor_labels, mode):
        prompt = build_cot_prompt(ind_class_names, neighbor_labels, mode)
        answers = []
        for _ in prompt.steps:
            answers.append(self._complete(node_id, prompt.messages(answers)))

        text = last_line(answers[3])
        if not text:
            raise GenerationError("empty completion", node_id=node_id)
        category = last_line(answers[2]) or last_line(answers[1])
        logger.debug("pseudo node {:d}: {} category '{}'", node_id, mode,
                     category)

        transcript = prompt.messages(answers[:3])
        transcript.append({'role': 'assistant', 'content': answers[3]})
        return GeneratedText(text, category, transcript)


def build_generator(oodgen_cfg, remote_cfg=None, donor_texts=None):
    """Instantiate the generator named in an OodGenConfig."""
    if oodgen_cfg.generator == 'remote-llm':
        if remote_cfg is None or not remote_cfg.llm_endpoint:
            raise ValueError("The remote-llm generator needs "
                             "remote.llm_endpoint")
        return RemoteLLMGenerator.from_config(remote_cfg, oodgen_cfg.seed)
    if oodgen_cfg.generator == 'random':
        return RandomTextGenerator(oodgen_cfg.seed, donor_texts)
    return TemplateGenerator(oodgen_cfg.seed)
