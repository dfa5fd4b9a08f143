// Control events the UI may send back over the run's subscription
// socket. The shapes here are the server's documented contract.

export interface ControlEvent {
    type: "interrupt" | "user_input";
    payload: Record<string, unknown>;
}

export function makeInterruptEvent(steeringText?: string, agent?: string): ControlEvent {
    const payload: Record<string, unknown> = {};
    if (steeringText) payload.text = steeringText;
    if (agent) payload.agent = agent;
    return { type: "interrupt", payload };
}

export function makeUserInputEvent(text: string, agent?: string): ControlEvent {
    const payload: Record<string, unknown> = { text };
    if (agent) payload.agent = agent;
    return { type: "user_input", payload };
}

export interface ControlAvailability {
    disabled: boolean;
    tooltip: string;
}

export function controlAvailability(connected: boolean | null): ControlAvailability {
    if (connected) {
        return { disabled: false, tooltip: "" };
    }
    return { disabled: true, tooltip: "run is disconnected; controls are unavailable" };
}
