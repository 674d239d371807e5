"""transformers backend. torch and transformers are imported on construction."""

from .formats import FormatError, softmax_pair


class HFBackend:
    def __init__(self, model_id, device="cpu", dtype="float32"):
        import torch
        from transformers import AutoModelForCausalLM, AutoTokenizer

        self._torch = torch
        self.name = model_id
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        if not self.tokenizer.is_fast:
            raise FormatError("offset mappings need a fast tokenizer")
        self.model = AutoModelForCausalLM.from_pretrained(model_id, torch_dtype=getattr(torch, dtype))
        self.model.to(device).eval()
        self.device = device
        self.width = self.model.config.hidden_size
        self.chat_template = None
        self._option_ids = {}
        self.option_flags = []
        for opt in ("A", "B"):
            ids = self.tokenizer.encode(" " + opt, add_special_tokens=False)
            if len(ids) > 1:
                self.option_flags.append(f"option {opt} is multi-token; first subtoken used")
            self._option_ids[opt] = ids[0]

    def _encode(self, text):
        enc = self.tokenizer(text, return_offsets_mapping=True, return_tensors="pt")
        offsets = [tuple(o) for o in enc.pop("offset_mapping")[0].tolist()]
        return enc.to(self.device), offsets

    def token_offsets(self, text):
        return self._encode(text)[1]

    def hidden_states(self, text):
        enc, offsets = self._encode(text)
        with self._torch.no_grad():
            out = self.model(**enc, output_hidden_states=True)
        states = self._torch.stack([h[0] for h in out.hidden_states]).float().cpu().numpy()
        return states, offsets

    def _decoder_layers(self):
        for path in ("model.layers", "transformer.h", "gpt_neox.layers"):
            obj = self.model
            try:
                for part in path.split("."):
                    obj = getattr(obj, part)
                return obj
            except AttributeError:
                continue
        raise FormatError("cannot locate decoder layers for patching")

    def _last_logits(self, text, layer=None, position=None, offset=None):
        enc, _ = self._encode(text)
        handle = None
        if offset is not None:
            if layer < 1:
                raise FormatError("patching the embedding output is not supported")
            vec = self._torch.as_tensor(offset, dtype=self.model.dtype, device=self.device)

            # hidden_states[layer] is the output of decoder block layer - 1
            def hook(_module, _inputs, output):
                hs = output[0] if isinstance(output, tuple) else output
                hs[0, position, :] += vec
                return output

            handle = self._decoder_layers()[layer - 1].register_forward_hook(hook)
        try:
            with self._torch.no_grad():
                logits = self.model(**enc).logits[0, -1]
        finally:
            if handle is not None:
                handle.remove()
        return logits

    def answer(self, prompt):
        logits = self._last_logits(prompt)
        generated = self.tokenizer.decode([int(logits.argmax())])
        return (
            generated,
            float(logits[self._option_ids["A"]]),
            float(logits[self._option_ids["B"]]),
            list(self.option_flags),
        )

    def option_probability(self, prompt, option, layer=None, position=None, offset=None):
        logits = self._last_logits(prompt, layer, position, offset)
        p_a, p_b = softmax_pair(float(logits[self._option_ids["A"]]), float(logits[self._option_ids["B"]]))
        return p_a if option == "A" else p_b
