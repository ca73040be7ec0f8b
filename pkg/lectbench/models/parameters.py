"""
File: parameters.py
Description: Describe and hold the parameters of every pipeline stage:
split construction, pseudo-OOD generation, text encoding, the model, the
losses and the training loop.
"""

import copy
import math

from ..utils.hashing import sha256_json


class ParameterDesc(object):
    """Description of a parameter.

    Args:
        name (str): Name of the parameter.
        description (str): Description of the parameter.
        default (any): Default value of the parameter.

    Attributes:
        name (str): Name of the parameter.
        description (str): Description of the parameter.
        default (any): Default value of the parameter.

    """
    def __init__(self, name, description, default):
        self.name = name
        self.description = description
        self.default = default

    def check_value(self, value):
        """Check that a value can be the parameter.

        Should be implemented in sub-class.

        """
        raise NotImplementedError("Abstract Class")

    def convert(self, value):
        """Normalize an accepted value (called after check_value)."""
        return value


class ParameterDescInt(ParameterDesc):
    """Description of an integer parameter.

    Args:
        min_val (int): Minimum value that can be taken by the parameter. If
            None, there is no minimum value.
        max_val (int): Maximum value that can be taken by the parameter. If
            None, there is no maximum value.

    """
    def __init__(self, name, description, min_val, max_val, default):
        super().__init__(name, description, default)
        self.min_val = min_val
        self.max_val = max_val

    def check_value(self, value):
        """Check that a value can be an int parameter.

        Raises:
            TypeError: If the value is not an int.
            ValueError: If it does not respect the constraints.

        """
        if not isinstance(value, int) or isinstance(value, bool):
            raise TypeError("The value for the parameter {} should be an "
                            "integer ({} instead)".format(self.name,
                                                          value.__class__))

        if self.min_val is not None and value < self.min_val:
            raise ValueError("The minimum value that can be given to the "
                             "parameter {} is {:d}. ({:d} "
                             "instead)".format(self.name,
                                               self.min_val,
                                               value))

        if self.max_val is not None and value > self.max_val:
            raise ValueError("The maximum value that can be given to the "
                             "parameter {} is {:d}. ({:d} "
                             "instead)".format(self.name,
                                               self.max_val,
                                               value))


class ParameterDescFloat(ParameterDesc):
    """Description of a float parameter.

    Integers are accepted and converted, since configuration files often
    write `1` for `1.0`.

    Args:
        min_val (float): Minimum value that can be taken by the parameter. If
            None, there is no minimum value.
        max_val (float): Maximum value that can be taken by the parameter. If
            None, there is no maximum value.
        open_min (bool): If True the minimum itself is excluded.
        open_max (bool): If True the maximum itself is excluded.

    """
    def __init__(self, name, description, min_val, max_val, default,
                 open_min=False, open_max=False):
        super().__init__(name, description, default)
        self.min_val = min_val
        self.max_val = max_val
        self.open_min = open_min
        self.open_max = open_max

    def check_value(self, value):
        """Check that a value can be a float parameter.

        Raises:
            TypeError: If the value is not a real number.
            ValueError: If it does not respect the constraints.

        """
        if not isinstance(value, (float, int)) or isinstance(value, bool):
            raise TypeError("The value for the parameter {} should be an "
                            "float ({} instead)".format(self.name,
                                                        value.__class__))
        if math.isnan(value):
            raise ValueError("The parameter {} cannot be NaN".format(self.name))

        if self.min_val is not None:
            if value < self.min_val or (self.open_min and value == self.min_val):
                raise ValueError("The value of the parameter {} must be {} "
                                 "{:.4g}. ({:.4g} instead)".format(
                                     self.name,
                                     '>' if self.open_min else '>=',
                                     self.min_val, value))

        if self.max_val is not None:
            if value > self.max_val or (self.open_max and value == self.max_val):
                raise ValueError("The value of the parameter {} must be {} "
                                 "{:.4g}. ({:.4g} instead)".format(
                                     self.name,
                                     '<' if self.open_max else '<=',
                                     self.max_val, value))

    def convert(self, value):
        return float(value)


class ParameterDescStr(ParameterDesc):
    """Description of a string parameter."""
    def check_value(self, value):
        """Check that a value can be a string parameter.

        Raises:
            TypeError: If the value is not a string.

        """
        if not isinstance(value, str):
            raise TypeError("The value for the parameter {} should be an "
                            "string ({} instead)".format(self.name,
                                                         value.__class__))


class ParameterDescBool(ParameterDesc):
    """Description of a boolean flag."""
    def check_value(self, value):
        if not isinstance(value, bool):
            raise TypeError("The value for the parameter {} should be a "
                            "boolean ({} instead)".format(self.name,
                                                          value.__class__))


class ParameterDescEnum(ParameterDesc):
    """Description of an enumerated parameter.

    Args:
        allowed_val (list): Of anything. It describes the list of values that
            can be taken by the parameter.

    """
    def __init__(self, name, description, allowed_val, default):
        super().__init__(name, description, default)
        self.allowed_val = allowed_val

    def check_value(self, value):
        """Check that a value can be a enum parameter.

        Raises:
            ValueError: If the value is not one of the allowed values.

        """
        if value not in self.allowed_val:
            raise ValueError("The value for the parameter {} should be one of "
                             "the allowed values ({}). ({} "
                             "instead)".format(self.name,
                                               str(self.allowed_val),
                                               value))


class ParameterDescIntList(ParameterDesc):
    """Description of a list of integers (seeds, class ids, grid values).

    Args:
        min_val (int): Minimum value of every item. None for no minimum.
        min_len (int): Minimum length of the list.
        unique (bool): If True duplicated items are rejected.

    """
    def __init__(self, name, description, min_val, min_len, default,
                 unique=True):
        super().__init__(name, description, default)
        self.min_val = min_val
        self.min_len = min_len
        self.unique = unique

    def check_value(self, value):
        if not isinstance(value, (list, tuple, set, frozenset)):
            raise TypeError("The value for the parameter {} should be a list "
                            "of integers ({} instead)".format(self.name,
                                                              value.__class__))
        items = list(value)
        for item in items:
            if not isinstance(item, int) or isinstance(item, bool):
                raise TypeError("The parameter {} only holds integers ({} "
                                "found)".format(self.name, item.__class__))
            if self.min_val is not None and item < self.min_val:
                raise ValueError("The items of the parameter {} must be >= "
                                 "{:d}. ({:d} found)".format(self.name,
                                                             self.min_val,
                                                             item))
        if len(items) < self.min_len:
            raise ValueError("The parameter {} needs at least {:d} "
                             "items".format(self.name, self.min_len))
        if self.unique and len(set(items)) != len(items):
            raise ValueError("The parameter {} holds duplicated "
                             "items".format(self.name))

    def convert(self, value):
        if isinstance(value, (set, frozenset)):
            return tuple(sorted(value))
        return tuple(value)


class Parameters(object):
    """Hold a list of parameters.

    Parameters are a list of attributes values, indexed by the name given to
    each parameter description in the _parameters attribute (which should be
    given for each sub-class).

    Parameter values can be fetched by attribute getting.

    Example:
        >>> p = ModelConfig(in_dim=384, out_dim=3)
        >>> p.hidden_dim
        64
        >>> p.dropout
        0.5

    Args:
        kwargs (dict): Key-values pair of parameters. The keys must follow the
            names given to the parameters descriptions. If a parameter is not
            given, the default value set in the parameter description will be
            used. If the value of a parameter is set to None, again the default
            value of the parameter description will be used.

    Raises:
        TypeError: for an unknown key or a value of the wrong type.
        ValueError: for a value out of range or inconsistent parameters.

    """
    # This attribute must be modified for the parameters sub-classes.
    _parameters = []

    def __init__(self, **kwargs):
        values = {}

        dict_params = {param_desc.name: param_desc for param_desc in
                       self._parameters}

        for key, value in kwargs.items():
            if key in dict_params:
                parameter_desc = dict_params[key]
                if value is not None:
                    parameter_desc.check_value(value)
                    values[key] = parameter_desc.convert(value)
                else:
                    values[key] = copy.copy(parameter_desc.default)
            else:
                raise TypeError("'{}' is an invalid keyword for these "
                                "parameters".format(key))

        for parameter_desc in self._parameters:
            if parameter_desc.name not in values:
                values[parameter_desc.name] = copy.copy(parameter_desc.default)

        object.__setattr__(self, '_values', values)
        self._check_consistency()

    def _check_consistency(self):
        """Check invariants linking several parameters.

        Sub-classes override it and raise ValueError on violation.

        """

    def __getattr__(self, key):
        if key.startswith('__') or key == '_values':
            raise AttributeError(key)
        if key not in self._values:
            raise AttributeError('No parameter is named {}'.format(key))
        return self._values[key]

    def __setattr__(self, key, value):
        raise AttributeError("Parameters are immutable, use replace()")

    def __eq__(self, other):
        return type(self) is type(other) and self._values == other._values

    def __hash__(self):
        return hash((type(self).__name__, self.config_hash()))

    def __repr__(self):
        content = ', '.join('{}={!r}'.format(k, v)
                            for k, v in sorted(self._values.items()))
        return '{}({})'.format(self.__class__.__name__, content)

    def __getstate__(self):
        return self._values

    def __setstate__(self, state):
        object.__setattr__(self, '_values', state)

    def as_dict(self):
        """Parameter values as a plain dict (tuples turned into lists)."""
        return {key: list(value) if isinstance(value, tuple) else value
                for key, value in self._values.items()}

    def replace(self, **overrides):
        """Copy of the parameters with some values replaced."""
        values = dict(self._values)
        values.update(overrides)
        return self.__class__(**values)

    def config_hash(self):
        return sha256_json({self.__class__.__name__: self.as_dict()})

    @classmethod
    def get_parameters_description(cls):
        """Getter for the list of parameters descriptions.

        Returns:
            list: of ParameterDesc.

        """
        return cls._parameters


class SplitSpec(Parameters):
    """Label-shift construction of the IND / OOD node split."""
    _parameters = [
        ParameterDescIntList('ood_classes',
                             'Class ids held out as OOD',
                             0, 1, (3,)),
        ParameterDescFloat('train_fraction',
                           'Fraction of the IND nodes used for training',
                           0.0, 1.0, 0.6, open_min=True, open_max=True),
        ParameterDescFloat('val_fraction',
                           'Fraction of the IND nodes used for validation',
                           0.0, 1.0, 0.2, open_min=True, open_max=True),
        ParameterDescInt('seed', 'Seed of the split', 0, 2 ** 64 - 1, 0),
    ]

    def _check_consistency(self):
        if self.train_fraction + self.val_fraction >= 1.0:
            raise ValueError("train_fraction + val_fraction must be < 1 "
                             "({:.4g} instead)".format(self.train_fraction +
                                                       self.val_fraction))


class OodGenConfig(Parameters):
    """Pseudo-OOD node generation.

    num_pseudo and c_max default to 0, meaning 'derive from the split':
    max(8, 10% of the training nodes) and the number of IND classes.
    """
    _parameters = [
        ParameterDescInt('num_pseudo', 'Number of pseudo-OOD nodes N_o '
                         '(0: derived from the training set size)',
                         0, None, 0),
        ParameterDescInt('c_max', 'Maximum IND neighbors per pseudo node '
                         '(0: number of IND classes)', 0, None, 0),
        ParameterDescEnum('mode', 'Distance of the generated categories',
                          ['near', 'far', 'mixed'], 'mixed'),
        ParameterDescInt('seed', 'Seed of the generation', 0, 2 ** 64 - 1, 0),
        ParameterDescEnum('generator', 'Text generator',
                          ['template', 'remote-llm', 'random'], 'template'),
        ParameterDescInt('concurrency', 'Concurrent remote conversations',
                         1, None, 4),
    ]


class EncoderConfig(Parameters):
    """Frozen text encoder."""
    _parameters = [
        ParameterDescEnum('kind', 'Encoder implementation',
                          ['hash', 'remote'], 'hash'),
        ParameterDescInt('dim', 'Embedding dimension', 1, None, 384),
        ParameterDescInt('seed', 'Seed of the hash encoder', 0, 2 ** 64 - 1, 0),
        ParameterDescInt('batch_size', 'Texts per remote request', 1, None, 64),
        ParameterDescInt('concurrency', 'Concurrent remote requests or '
                         'encoding threads', 1, None, 4),
    ]


class RemoteConfig(Parameters):
    """Endpoints of the remote embedding and chat-completion services."""
    _parameters = [
        ParameterDescStr('embed_endpoint', 'Embeddings endpoint URL', ''),
        ParameterDescStr('embed_model', 'Embedding model name', ''),
        ParameterDescStr('llm_endpoint', 'Chat-completion endpoint URL', ''),
        ParameterDescStr('llm_model', 'Chat model name', ''),
        ParameterDescInt('max_retries', 'Retries on transient failures',
                         0, None, 4),
        ParameterDescFloat('backoff_factor', 'Exponential backoff base (s)',
                           0.0, None, 0.5),
        ParameterDescFloat('timeout', 'Per-request timeout (s)',
                           0.0, None, 60.0, open_min=True),
    ]


class ModelConfig(Parameters):
    """Projector + two-layer graph convolution classifier."""
    _parameters = [
        ParameterDescInt('in_dim', 'Embedding dimension', 1, None, 384),
        ParameterDescInt('proj_dim', 'Projection dimension', 1, None, 128),
        ParameterDescInt('hidden_dim', 'Hidden dimension', 1, None, 64),
        ParameterDescInt('out_dim', 'Number of IND classes', 1, None, 1),
        ParameterDescFloat('dropout', 'Dropout rate after the first layer',
                           0.0, 1.0, 0.5, open_max=True),
        ParameterDescFloat('bn_momentum', 'Batch-norm running stats momentum',
                           0.0, 1.0, 0.1),
        ParameterDescFloat('bn_eps', 'Batch-norm epsilon', 0.0, None, 1e-5,
                           open_min=True),
        ParameterDescInt('seed', 'Seed of the initialisation', 0, 2 ** 64 - 1, 0),
    ]


class LossWeights(Parameters):
    """Weights and margins of the training objective."""
    _parameters = [
        ParameterDescFloat('gamma', 'Margin of the linked IND-OOD hinge',
                           0.0, None, 1.0),
        ParameterDescFloat('lambda1', 'Weight of the linked IND-OOD group',
                           0.0, None, 0.1),
        ParameterDescFloat('lambda2', 'Weight of the triplet loss',
                           0.0, None, 0.1),
        ParameterDescFloat('lambda_mean', 'Weight of the mean-energy '
                           'constraint inside the linked group', 0.0, None, 0.01),
        ParameterDescFloat('gamma_mean', 'Margin of the mean-energy constraint',
                           0.0, None, 1.0),
        ParameterDescBool('use_mean_constraint', 'Enable the mean-energy '
                          'constraint', True),
    ]


PAIR_PRESETS = {
    'cora': (300, 100),
    'citeseer': (600, 400),
}


class TrainConfig(Parameters):
    """Training loop and ablation switches."""
    _parameters = [
        ParameterDescInt('epochs', 'Number of full-graph epochs', 1, None, 300),
        ParameterDescFloat('lr', 'Adam learning rate', 0.0, None, 0.001,
                           open_min=True),
        ParameterDescFloat('weight_decay', 'Coupled L2 weight decay',
                           0.0, None, 0.0005),
        ParameterDescInt('num_pairs', 'Linked IND-OOD pairs per epoch',
                         0, None, 300),
        ParameterDescInt('num_triplets', 'Triplets per epoch', 0, None, 100),
        ParameterDescEnum('pair_preset', 'Named (pairs, triplets) counts '
                          'overriding num_pairs / num_triplets',
                          ['none'] + sorted(PAIR_PRESETS), 'none'),
        ParameterDescBool('no_contrastive', 'Ablation: supervised loss only',
                          False),
        ParameterDescBool('random_text_ood', 'Ablation: random pseudo texts',
                          False),
        ParameterDescBool('no_ind_ood', 'Ablation: drop the linked IND-OOD '
                          'loss', False),
        ParameterDescBool('no_triplet', 'Ablation: drop the triplet loss',
                          False),
        ParameterDescIntList('seeds', 'Seeds of the repeated runs', 0, 1,
                             (0, 1, 2, 3, 4)),
        ParameterDescFloat('target_tpr', 'IND acceptance rate of the '
                           'threshold', 0.0, 1.0, 0.95, open_min=True),
        ParameterDescBool('save_best', 'Keep the best proxy-validation '
                          'checkpoint', True),
        ParameterDescInt('log_every', 'Epochs between progress lines',
                         1, None, 50),
    ]

    def _check_consistency(self):
        if self.no_contrastive and not (self.no_ind_ood and self.no_triplet):
            raise ValueError("no_contrastive implies no_ind_ood and "
                             "no_triplet")

    @property
    def pair_counts(self):
        """(linked pairs, triplets) sampled per epoch."""
        if self.pair_preset != 'none':
            return PAIR_PRESETS[self.pair_preset]
        return self.num_pairs, self.num_triplets

    def effective_weights(self, weights):
        """Loss weights once the ablation switches are applied."""
        overrides = {}
        if self.no_ind_ood:
            overrides['lambda1'] = 0.0
        if self.no_triplet:
            overrides['lambda2'] = 0.0
        return weights.replace(**overrides) if overrides else weights

    @classmethod
    def ablation(cls, arm, **kwargs):
        """Configuration of a named ablation arm.

        Args:
            arm (str): One of 'full', 'no_contrastive', 'random_text',
                'no_ind_ood', 'no_triplet'.

        """
        flags = {
            'full': {},
            'no_contrastive': {'no_contrastive': True, 'no_ind_ood': True,
                               'no_triplet': True},
            'random_text': {'random_text_ood': True},
            'no_ind_ood': {'no_ind_ood': True},
            'no_triplet': {'no_triplet': True},
        }
        if arm not in flags:
            raise ValueError("Unknown ablation arm {} (one of {})".format(
                arm, sorted(flags)))
        kwargs.update(flags[arm])
        return cls(**kwargs)


ABLATION_ARMS = ('full', 'no_contrastive', 'random_text', 'no_ind_ood',
                 'no_triplet')


class ExperimentConfig(object):
    """Every parameter block of a run, as read from a config file.

    The config file holds one table per block. The model block's in_dim
    and out_dim are always derived from the encoder and the split.

    Example:
        >>> config = ExperimentConfig.from_dict({'train': {'epochs': 50}})
        >>> config.train.epochs
        50

    Args:
        blocks (dict): Block name -> Parameters (or dict of values). Missing
            blocks take their defaults.

    Raises:
        TypeError: on an unknown block or key.

    """
    BLOCKS = {
        'split': SplitSpec,
        'oodgen': OodGenConfig,
        'encoder': EncoderConfig,
        'model': ModelConfig,
        'loss': LossWeights,
        'train': TrainConfig,
        'remote': RemoteConfig,
    }

    def __init__(self, **blocks):
        for name in blocks:
            if name not in self.BLOCKS:
                raise TypeError("'{}' is an invalid config table (one of "
                                "{})".format(name, sorted(self.BLOCKS)))
        for name, cls in self.BLOCKS.items():
            value = blocks.get(name)
            if value is None:
                value = cls()
            elif isinstance(value, dict):
                value = cls(**value)
            elif not isinstance(value, cls):
                raise TypeError("The config table {} should be a {}".format(
                    name, cls.__name__))
            setattr(self, name, value)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    def as_dict(self):
        return {name: getattr(self, name).as_dict() for name in self.BLOCKS}

    def replace(self, **blocks):
        values = {name: getattr(self, name) for name in self.BLOCKS}
        values.update(blocks)
        return ExperimentConfig(**values)

    def with_seed(self, seed):
        """Same config with the split, generation and model seeds set to
        one root seed."""
        return self.replace(split=self.split.replace(seed=seed),
                            oodgen=self.oodgen.replace(seed=seed),
                            model=self.model.replace(seed=seed))

    def with_run_seed(self, seed):
        """Seed of one repeated run: the split stays, the pseudo nodes and
        the model change."""
        return self.replace(oodgen=self.oodgen.replace(seed=seed),
                            model=self.model.replace(seed=seed))

    def config_hash(self):
        return sha256_json(self.as_dict())

    def __eq__(self, other):
        return (isinstance(other, ExperimentConfig) and
                self.as_dict() == other.as_dict())

    def __repr__(self):
        return 'ExperimentConfig({})'.format(', '.join(
            '{}={!r}'.format(name, getattr(self, name))
            for name in self.BLOCKS))
