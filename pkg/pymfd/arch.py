# -*- coding: utf-8 -*-
# Copyright (c) 2026-present pymfd contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.
"""
Declarative description of the moment network and its shape checker.

Architectures are written one layer per line::

    input C            # C input channels; a literal integer pins the channel count
    conv K S P 2H      # kernel, stride, padding, output channels (periodic padding)
    batchnorm
    leaky_relu
    flatten
    dropout DR         # a rate in [0, 1) or the symbol DR
    fc 128H 64H        # input and output features

Channel counts are integers or integer multiples of the width symbol ``H``.
"""
from __future__ import annotations

import abc
import importlib.resources
import typing as t

from pymfd import errors
from pymfd import lexer
from pymfd import tokens

__all__ = [
    "WIDTH_SYMBOL",
    "Channels",
    "LayerShape",
    "Layer",
    "Input",
    "Conv",
    "BatchNorm",
    "LeakyReLU",
    "Flatten",
    "Dropout",
    "FullyConnected",
    "Architecture",
    "parse_architecture",
    "default_architecture",
    "bundled_architecture",
    "propagate_shapes",
]

WIDTH_SYMBOL = "H"
CHANNEL_SYMBOL = "C"
DROPOUT_SYMBOL = "DR"


class Channels(t.NamedTuple):
    """``coefficient`` channels, times ``H`` when ``symbolic``."""

    coefficient: int
    symbolic: bool = False

    def __str__(self) -> str:
        if not self.symbolic:
            return str(self.coefficient)
        return WIDTH_SYMBOL if self.coefficient == 1 else f"{self.coefficient}{WIDTH_SYMBOL}"

    def scaled(self, factor: int) -> Channels:
        return Channels(self.coefficient * factor, self.symbolic)

    def resolve(self, width: t.Optional[int]) -> Channels:
        if width is None or not self.symbolic:
            return self
        return Channels(self.coefficient * width)


class LayerShape(t.NamedTuple):
    """``channels x height x width``, or a flat feature vector once height and width are None."""

    channels: Channels
    height: t.Optional[int] = None
    width: t.Optional[int] = None

    def __str__(self) -> str:
        if self.flat:
            return str(self.channels)
        return f"{self.channels}x{self.height}x{self.width}"

    @property
    def flat(self) -> bool:
        return self.height is None


class Layer(abc.ABC):
    __slots__ = ()

    @abc.abstractmethod
    def __str__(self) -> str:
        ...

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({str(self)!r})"

    @abc.abstractmethod
    def propagate(self, shape: LayerShape, width: t.Optional[int]) -> LayerShape:
        ...

    def _require_spatial(self, shape: LayerShape) -> t.Tuple[int, int]:
        if shape.height is None or shape.width is None:
            raise errors.ShapeMismatch(f"{self} needs a spatial input, got {shape}")
        return shape.height, shape.width


class Input(Layer):
    __slots__ = ("channels",)

    def __init__(self, channels: t.Optional[int] = None) -> None:
        self.channels = channels

    def __str__(self) -> str:
        return f"input {CHANNEL_SYMBOL if self.channels is None else self.channels}"

    def propagate(self, shape: LayerShape, width: t.Optional[int]) -> LayerShape:
        self._require_spatial(shape)
        if self.channels is not None and shape.channels != Channels(self.channels):
            raise errors.ShapeMismatch(f"{self} was given {shape.channels} channels")
        return shape


class Conv(Layer):
    """Convolution with periodic padding."""

    __slots__ = ("kernel", "stride", "padding", "out_channels")

    def __init__(self, kernel: int, stride: int, padding: int, out_channels: Channels) -> None:
        if kernel < 1 or stride < 1 or padding < 0:
            raise ValueError("conv needs kernel >= 1, stride >= 1 and padding >= 0")
        self.kernel = kernel
        self.stride = stride
        self.padding = padding
        self.out_channels = out_channels

    def __str__(self) -> str:
        return f"conv {self.kernel} {self.stride} {self.padding} {self.out_channels}"

    def output_size(self, size: int) -> int:
        padded = size + 2 * self.padding
        if padded < self.kernel:
            raise errors.ShapeUnderflow(str(self), size, self.kernel)
        return (padded - self.kernel) // self.stride + 1

    def propagate(self, shape: LayerShape, width: t.Optional[int]) -> LayerShape:
        height, breadth = self._require_spatial(shape)
        return LayerShape(self.out_channels.resolve(width), self.output_size(height), self.output_size(breadth))


class _ShapePreserving(Layer):
    __slots__ = ()

    name: t.ClassVar[str]

    def __str__(self) -> str:
        return self.name

    def propagate(self, shape: LayerShape, width: t.Optional[int]) -> LayerShape:
        return shape


class BatchNorm(_ShapePreserving):
    __slots__ = ()
    name = "batchnorm"


class LeakyReLU(_ShapePreserving):
    __slots__ = ()
    name = "leaky_relu"


class Dropout(_ShapePreserving):
    __slots__ = ("rate",)
    name = "dropout"

    def __init__(self, rate: t.Optional[float] = None) -> None:
        if rate is not None and not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")
        self.rate = rate

    def __str__(self) -> str:
        return f"dropout {DROPOUT_SYMBOL if self.rate is None else repr(self.rate)}"


class Flatten(Layer):
    __slots__ = ()

    def __str__(self) -> str:
        return "flatten"

    def propagate(self, shape: LayerShape, width: t.Optional[int]) -> LayerShape:
        height, breadth = self._require_spatial(shape)
        return LayerShape(shape.channels.scaled(height * breadth))


class FullyConnected(Layer):
    __slots__ = ("in_features", "out_features")

    def __init__(self, in_features: Channels, out_features: Channels) -> None:
        self.in_features = in_features
        self.out_features = out_features

    def __str__(self) -> str:
        return f"fc {self.in_features} {self.out_features}"

    def propagate(self, shape: LayerShape, width: t.Optional[int]) -> LayerShape:
        if not shape.flat:
            raise errors.ShapeMismatch(f"{self} needs a flattened input, got {shape}")
        if shape.channels != self.in_features.resolve(width):
            raise errors.ShapeMismatch(f"{self} expects {self.in_features.resolve(width)} inputs, got {shape}")
        return LayerShape(self.out_features.resolve(width))


class Architecture:
    __slots__ = ("layers",)

    def __init__(self, layers: t.Sequence[Layer]) -> None:
        self.layers: t.List[Layer] = list(layers)

    def __str__(self) -> str:
        return "".join(f"{layer}\n" for layer in self.layers)

    def __repr__(self) -> str:
        return f"Architecture({len(self.layers)} layers)"

    @property
    def convolutions(self) -> t.List[Conv]:
        return [layer for layer in self.layers if isinstance(layer, Conv)]


class _ArchParser(lexer.TokenStream):
    __slots__ = ()

    def integer(self, what: str, minimum: int) -> int:
        token = self.expect(what, tokens.TokenType.INT_LITERAL)
        if token.value < minimum:
            self.syntax_error(f"{what} must be at least {minimum}")
        return int(token.value)

    def channels(self, what: str) -> Channels:
        self.error_stack.appendleft(what)
        token = self.next_token()
        if isinstance(token, tokens.IdentifierToken) and token.value == WIDTH_SYMBOL:
            self.error_stack.popleft()
            return Channels(1, True)
        if not isinstance(token, tokens.IntToken) or token.value < 1:
            self.syntax_error()
        self.error_stack.popleft()

        nxt = self.peek_next_token()
        if isinstance(nxt, tokens.IdentifierToken) and nxt.at == token.at + token.width:
            self.next_token()
            if nxt.value != WIDTH_SYMBOL:
                self.syntax_error(f"Unknown channel symbol {nxt.value!r}; expected {WIDTH_SYMBOL!r}")
            return Channels(token.value, True)
        return Channels(token.value)

    def layer(self) -> Layer:
        name = self.expect("layer name", tokens.TokenType.IDENTIFIER)
        layer: Layer

        if name.value == "input":
            nxt = self.peek_next_token()
            if isinstance(nxt, tokens.IdentifierToken) and nxt.value == CHANNEL_SYMBOL:
                self.next_token()
                layer = Input()
            else:
                layer = Input(self.integer("channels", 1))
        elif name.value == "conv":
            kernel = self.integer("kernel", 1)
            stride = self.integer("stride", 1)
            padding = self.integer("padding", 0)
            layer = Conv(kernel, stride, padding, self.channels("output channels"))
        elif name.value == "dropout":
            self.error_stack.appendleft("rate")
            token = self.next_token()
            if isinstance(token, tokens.IdentifierToken) and token.value == DROPOUT_SYMBOL:
                layer = Dropout()
            elif isinstance(token, (tokens.IntToken, tokens.FloatToken)) and 0.0 <= token.value < 1.0:
                layer = Dropout(float(token.value))
            else:
                self.syntax_error()
            self.error_stack.popleft()
        elif name.value == "fc":
            layer = FullyConnected(self.channels("input features"), self.channels("output features"))
        elif name.value == BatchNorm.name:
            layer = BatchNorm()
        elif name.value == LeakyReLU.name:
            layer = LeakyReLU()
        elif name.value == "flatten":
            layer = Flatten()
        else:
            self.syntax_error(f"Unknown layer {name.value!r}")

        self.expect_end()
        return layer


def parse_architecture(text: str, source: t.Optional[str] = None) -> Architecture:
    lex = lexer.Lexer(text, source)
    layers = []
    for statement in lex.statements():
        layer = _ArchParser(lex, statement).layer()
        if isinstance(layer, Input) and layers:
            raise lex.error("input must be the first layer", statement.line_no, statement.tokens[0].columns)
        layers.append(layer)
    if not layers:
        raise errors.EmptyInput(f"{source or 'architecture'} declares no layers")
    return Architecture(layers)


def default_architecture(n_params: int = 6, channels: t.Optional[int] = None) -> Architecture:
    """
    The moment network for 256 x 256 inputs: six blocks of three convolutions each halving the
    map, a 4 x 4 convolution down to 128H x 1 x 1 and two fully connected layers predicting a
    mean and a standard deviation per parameter.
    """
    if n_params < 1:
        raise ValueError("n_params must be at least 1")

    layers: t.List[Layer] = [Input(channels)]
    for block in range(6):
        width = Channels(2 ** (block + 1), True)
        for kernel, stride, padding in ((3, 1, 1), (3, 1, 1), (2, 2, 0)):
            layers.append(Conv(kernel, stride, padding, width))
            # the very first convolution feeds its activation directly
            if len(layers) > 2:
                layers.append(BatchNorm())
            layers.append(LeakyReLU())

    layers.extend(
        [
            Conv(4, 1, 0, Channels(128, True)),
            BatchNorm(),
            LeakyReLU(),
            Flatten(),
            Dropout(),
            FullyConnected(Channels(128, True), Channels(64, True)),
            LeakyReLU(),
            Dropout(),
            FullyConnected(Channels(64, True), Channels(2 * n_params)),
        ]
    )
    return Architecture(layers)


def bundled_architecture() -> Architecture:
    """The six-parameter network shipped in ``pymfd/data/moments_network.arch``."""
    resource = importlib.resources.files("pymfd") / "data" / "moments_network.arch"
    return parse_architecture(resource.read_text(encoding="utf-8"), "moments_network.arch")


def propagate_shapes(
    arch: Architecture, input_shape: t.Tuple[int, int, int], width: t.Optional[int] = None
) -> t.List[LayerShape]:
    """
    Output shape of every layer for a ``C x height x width`` input.

    Args:
        arch (:obj:`Architecture`): Network to check.
        input_shape: ``(C, height, width)`` of the input maps.
        width (Optional[:obj:`int`]): Value of ``H``; channel counts stay symbolic when omitted.

    Returns:
        One :obj:`LayerShape` per layer, in order.

    Raises:
        :obj:`~pymfd.errors.ShapeUnderflow`: A convolution's kernel exceeds its padded input.
        :obj:`~pymfd.errors.ShapeMismatch`: Layers do not connect.
    """
    c, height, breadth = input_shape
    if min(c, height, breadth) < 1 or (width is not None and width < 1):
        raise ValueError("input sizes and H must be positive")

    shape = LayerShape(Channels(c), height, breadth)
    shapes = []
    for layer in arch.layers:
        shape = layer.propagate(shape, width)
        shapes.append(shape)
    return shapes
